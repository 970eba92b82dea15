#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "npaft/bart/forest.hpp"

namespace npaft::bart {

// Pre-order snapshot of a tree for out-of-sample prediction. A node with
// var < 0 is a leaf holding `x` as its value; otherwise `x` is the threshold,
// the left child follows immediately and `right` is the right child's
// offset from the tree's root.
struct CompactNode {
  std::int32_t var = -1;
  std::int32_t right = -1;
  double x = 0.0;
};

struct CompactForest {
  std::vector<CompactNode> nodes;
  std::vector<std::uint32_t> roots;  // offset of each tree in `nodes`

  double predict(std::span<const double> u) const;
  // Sum over trees that split on `var` only.
  double predict_using(std::span<const double> u, int var) const;
  bool tree_uses(std::size_t t, int var) const;
  std::size_t tree_size(std::size_t t) const;
};

CompactForest compact(const Forest& forest);
CompactNode* append_tree(const Tree& tree, std::vector<CompactNode>& out);

// One line per forest: tree count, then per tree node count and triples.
void write_compact(std::ostream& os, const CompactForest& f);
CompactForest read_compact(std::istream& is);

}  // namespace npaft::bart
