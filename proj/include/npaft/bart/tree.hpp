#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace npaft::bart {

struct TreeNode {
  int parent = -1;
  int left = -1;
  int right = -1;
  int var = -1;          // predictor column of the rule u_var <= threshold
  int cut = -1;          // index into the column's split grid
  double threshold = 0;  // grid value at `cut`
  double value = 0;      // leaf value (log-time units)
  int depth = 0;
  bool alive = true;
};

// Binary regression tree stored in a node pool. Node 0 is the root; pruned
// nodes are recycled through a free list, so ids of surviving nodes are
// stable across grow/prune.
class Tree {
 public:
  explicit Tree(double leaf_value = 0.0);

  static constexpr int kRoot = 0;

  const TreeNode& node(int id) const { return nodes_[id]; }
  TreeNode& node(int id) { return nodes_[id]; }
  std::size_t pool_size() const { return nodes_.size(); }

  bool is_leaf(int id) const { return nodes_[id].left < 0; }
  bool is_nog(int id) const;  // internal node whose children are both leaves

  std::vector<int> leaves() const;
  std::vector<int> internal_nodes() const;
  std::vector<int> nog_nodes() const;
  // (parent, child) pairs where both are internal.
  std::vector<std::pair<int, int>> internal_pairs() const;
  std::size_t leaf_count() const;
  int max_depth() const;
  bool uses_variable(int var) const;

  // Splits a leaf; children inherit the leaf's value. Returns the left id.
  int grow(int leaf, int var, int cut, double threshold);
  // Collapses an internal node whose children are leaves.
  void prune(int id);

  // Leaf reached by a binned predictor row.
  int find_leaf(const std::uint16_t* bins) const {
    int id = kRoot;
    while (nodes_[id].left >= 0) {
      const TreeNode& nd = nodes_[id];
      id = bins[nd.var] <= nd.cut ? nd.left : nd.right;
    }
    return id;
  }
  // Leaf reached by a raw predictor vector u (go left iff u_var <= threshold).
  int find_leaf(std::span<const double> u) const;
  double predict(std::span<const double> u) const { return nodes_[find_leaf(u)].value; }

 private:
  int allocate();

  std::vector<TreeNode> nodes_;
  std::vector<int> free_;
};

// Same shape and rules, ignoring node ids and leaf values.
bool same_structure(const Tree& a, const Tree& b);

}  // namespace npaft::bart
