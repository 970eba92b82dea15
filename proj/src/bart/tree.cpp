#include "npaft/bart/tree.hpp"

#include <algorithm>
#include <functional>

namespace npaft::bart {

Tree::Tree(double leaf_value) {
  TreeNode root;
  root.value = leaf_value;
  nodes_.push_back(root);
}

bool Tree::is_nog(int id) const {
  const TreeNode& nd = nodes_[id];
  return nd.left >= 0 && is_leaf(nd.left) && is_leaf(nd.right);
}

std::vector<int> Tree::leaves() const {
  std::vector<int> out;
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    if (nodes_[id].alive && is_leaf(id)) out.push_back(id);
  }
  return out;
}

std::vector<int> Tree::internal_nodes() const {
  std::vector<int> out;
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    if (nodes_[id].alive && !is_leaf(id)) out.push_back(id);
  }
  return out;
}

std::vector<int> Tree::nog_nodes() const {
  std::vector<int> out;
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    if (nodes_[id].alive && is_nog(id)) out.push_back(id);
  }
  return out;
}

std::vector<std::pair<int, int>> Tree::internal_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int id : internal_nodes()) {
    for (int child : {nodes_[id].left, nodes_[id].right}) {
      if (!is_leaf(child)) out.emplace_back(id, child);
    }
  }
  return out;
}

std::size_t Tree::leaf_count() const {
  std::size_t n = 0;
  for (int id = 0; id < static_cast<int>(nodes_.size()); ++id) {
    n += nodes_[id].alive && is_leaf(id);
  }
  return n;
}

int Tree::max_depth() const {
  int d = 0;
  for (const auto& nd : nodes_) {
    if (nd.alive) d = std::max(d, nd.depth);
  }
  return d;
}

bool Tree::uses_variable(int var) const {
  for (const auto& nd : nodes_) {
    if (nd.alive && nd.left >= 0 && nd.var == var) return true;
  }
  return false;
}

int Tree::allocate() {
  if (!free_.empty()) {
    // Lowest free id first keeps the pool layout canonical.
    auto it = std::min_element(free_.begin(), free_.end());
    const int id = *it;
    free_.erase(it);
    nodes_[id] = TreeNode{};
    return id;
  }
  nodes_.emplace_back();
  return static_cast<int>(nodes_.size()) - 1;
}

int Tree::grow(int leaf, int var, int cut, double threshold) {
  const int l = allocate();
  const int r = allocate();
  TreeNode& nd = nodes_[leaf];
  nd.var = var;
  nd.cut = cut;
  nd.threshold = threshold;
  nd.left = l;
  nd.right = r;
  for (int c : {l, r}) {
    nodes_[c].parent = leaf;
    nodes_[c].depth = nd.depth + 1;
    nodes_[c].value = nd.value;
  }
  return l;
}

void Tree::prune(int id) {
  TreeNode& nd = nodes_[id];
  const double v = 0.5 * (nodes_[nd.left].value + nodes_[nd.right].value);
  for (int c : {nd.left, nd.right}) {
    nodes_[c].alive = false;
    nodes_[c].left = nodes_[c].right = -1;
    free_.push_back(c);
  }
  nd.left = nd.right = -1;
  nd.var = nd.cut = -1;
  nd.threshold = 0.0;
  nd.value = v;
}

int Tree::find_leaf(std::span<const double> u) const {
  int id = kRoot;
  while (nodes_[id].left >= 0) {
    const TreeNode& nd = nodes_[id];
    id = u[nd.var] <= nd.threshold ? nd.left : nd.right;
  }
  return id;
}

bool same_structure(const Tree& a, const Tree& b) {
  std::function<bool(int, int)> rec = [&](int ia, int ib) {
    const bool la = a.is_leaf(ia);
    const bool lb = b.is_leaf(ib);
    if (la != lb) return false;
    if (la) return true;
    const TreeNode& na = a.node(ia);
    const TreeNode& nb = b.node(ib);
    return na.var == nb.var && na.cut == nb.cut && rec(na.left, nb.left) &&
           rec(na.right, nb.right);
  };
  return rec(Tree::kRoot, Tree::kRoot);
}

}  // namespace npaft::bart
