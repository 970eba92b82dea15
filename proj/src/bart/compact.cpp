#include "npaft/bart/compact.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "npaft/error.hpp"

namespace npaft::bart {

namespace {

void emit(const Tree& tree, int id, std::vector<CompactNode>& out) {
  const TreeNode& nd = tree.node(id);
  const std::size_t at = out.size();
  out.push_back({});
  if (tree.is_leaf(id)) {
    out[at] = {-1, -1, nd.value};
    return;
  }
  emit(tree, nd.left, out);
  const auto right = static_cast<std::int32_t>(out.size());
  emit(tree, nd.right, out);
  out[at] = {nd.var, right, nd.threshold};
}

double walk(const CompactNode* base, std::span<const double> u) {
  std::size_t k = 0;
  while (base[k].var >= 0) {
    const CompactNode& nd = base[k];
    k = u[static_cast<std::size_t>(nd.var)] <= nd.x ? k + 1 : static_cast<std::size_t>(nd.right);
  }
  return base[k].x;
}

}  // namespace

CompactNode* append_tree(const Tree& tree, std::vector<CompactNode>& out) {
  std::vector<CompactNode> local;
  emit(tree, Tree::kRoot, local);
  const std::size_t at = out.size();
  out.insert(out.end(), local.begin(), local.end());
  return out.data() + at;
}

CompactForest compact(const Forest& forest) {
  CompactForest f;
  f.roots.reserve(forest.size());
  for (const Tree& t : forest.trees()) {
    f.roots.push_back(static_cast<std::uint32_t>(f.nodes.size()));
    append_tree(t, f.nodes);
  }
  return f;
}

std::size_t CompactForest::tree_size(std::size_t t) const {
  const std::size_t end = t + 1 < roots.size() ? roots[t + 1] : nodes.size();
  return end - roots[t];
}

bool CompactForest::tree_uses(std::size_t t, int var) const {
  const std::size_t end = roots[t] + tree_size(t);
  for (std::size_t k = roots[t]; k < end; ++k)
    if (nodes[k].var == var) return true;
  return false;
}

double CompactForest::predict(std::span<const double> u) const {
  double total = 0.0;
  for (std::uint32_t r : roots) total += walk(nodes.data() + r, u);
  return total;
}

double CompactForest::predict_using(std::span<const double> u, int var) const {
  double total = 0.0;
  for (std::size_t t = 0; t < roots.size(); ++t)
    if (tree_uses(t, var)) total += walk(nodes.data() + roots[t], u);
  return total;
}

void write_compact(std::ostream& os, const CompactForest& f) {
  char buf[64];
  os << f.roots.size();
  for (std::size_t t = 0; t < f.roots.size(); ++t) {
    const std::size_t len = f.tree_size(t);
    os << ' ' << len;
    for (std::size_t k = 0; k < len; ++k) {
      const CompactNode& nd = f.nodes[f.roots[t] + k];
      std::snprintf(buf, sizeof buf, "%.17g", nd.x);
      os << ' ' << nd.var << ' ' << nd.right << ' ' << buf;
    }
  }
  os << '\n';
}

CompactForest read_compact(std::istream& is) {
  CompactForest f;
  std::size_t trees = 0;
  if (!(is >> trees)) throw InputError("bart", "malformed forest record");
  for (std::size_t t = 0; t < trees; ++t) {
    std::size_t len = 0;
    if (!(is >> len) || len == 0) throw InputError("bart", "malformed forest record");
    const auto root = static_cast<std::uint32_t>(f.nodes.size());
    f.roots.push_back(root);
    for (std::size_t k = 0; k < len; ++k) {
      CompactNode nd;
      std::string x;
      if (!(is >> nd.var >> nd.right >> x)) throw InputError("bart", "malformed forest record");
      nd.x = std::strtod(x.c_str(), nullptr);
      if (nd.var >= 0) {
        if (nd.right <= static_cast<std::int32_t>(k) || nd.right >= static_cast<std::int32_t>(len))
          throw InputError("bart", "forest record has a bad child offset");
      }
      f.nodes.push_back(nd);
    }
  }
  return f;
}

}  // namespace npaft::bart
