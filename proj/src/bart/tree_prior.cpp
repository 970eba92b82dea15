#include "npaft/bart/tree_prior.hpp"

#include <cmath>
#include <limits>

#include "npaft/error.hpp"

namespace npaft::bart {

void ForestPrior::validate() const {
  const char* m = "bart-forest";
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError(m, "alpha must lie in (0, 1)");
  if (!(beta >= 0.0)) throw ConfigError(m, "beta must be >= 0");
  if (trees < 1) throw ConfigError(m, "tree count must be >= 1");
  if (!(k > 0.0)) throw ConfigError(m, "k must be > 0");
  if (!(zeta > 0.0)) throw ConfigError(m, "zeta must be > 0");
}

double split_prob(int depth, const ForestPrior& prior) {
  return prior.alpha * std::pow(1.0 + depth, -prior.beta);
}

NodeConstraints::NodeConstraints(const Tree& tree, int node, const data::SplitGrid& grid)
    : grid_(&grid) {
  int child = node;
  int parent = tree.node(node).parent;
  while (parent >= 0) {
    const TreeNode& p = tree.node(parent);
    Bound* b = nullptr;
    for (auto& existing : bounds_) {
      if (existing.var == p.var) b = &existing;
    }
    if (b == nullptr) {
      bounds_.push_back({p.var, 0, static_cast<int>(grid.cut_count(p.var))});
      b = &bounds_.back();
    }
    if (p.left == child) {
      b->hi = std::min(b->hi, p.cut);
    } else {
      b->lo = std::max(b->lo, p.cut + 1);
    }
    child = parent;
    parent = p.parent;
  }
}

CutRange NodeConstraints::range(int var) const {
  for (const auto& b : bounds_) {
    if (b.var == var) return {b.lo, b.hi};
  }
  return {0, static_cast<int>(grid_->cut_count(var))};
}

std::vector<int> NodeConstraints::splittable_variables() const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(grid_->columns()); ++v) {
    if (range(v).size() > 0) out.push_back(v);
  }
  return out;
}

int NodeConstraints::splittable_variable_count() const {
  int count = 0;
  for (int v = 0; v < static_cast<int>(grid_->columns()); ++v) {
    if (grid_->cut_count(v) > 0) ++count;
  }
  for (const auto& b : bounds_) {
    if (grid_->cut_count(b.var) > 0 && CutRange{b.lo, b.hi}.size() == 0) --count;
  }
  return count;
}

double tree_log_prior(const Tree& tree, const ForestPrior& prior, const data::SplitGrid& grid) {
  double lp = 0.0;
  for (int id = 0; id < static_cast<int>(tree.pool_size()); ++id) {
    const TreeNode& nd = tree.node(id);
    if (!nd.alive) continue;
    NodeConstraints cons(tree, id, grid);
    const int nvars = cons.splittable_variable_count();
    const double ps = nvars > 0 ? split_prob(nd.depth, prior) : 0.0;
    if (tree.is_leaf(id)) {
      lp += std::log1p(-ps);
      continue;
    }
    const CutRange r = cons.range(nd.var);
    if (nvars == 0 || nd.cut < r.lo || nd.cut >= r.hi) {
      return -std::numeric_limits<double>::infinity();
    }
    lp += std::log(ps) - std::log(static_cast<double>(nvars)) -
          std::log(static_cast<double>(r.size()));
  }
  return lp;
}

}  // namespace npaft::bart
