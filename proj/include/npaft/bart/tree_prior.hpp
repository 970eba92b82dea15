#pragma once

#include <vector>

#include "npaft/bart/tree.hpp"
#include "npaft/data/split_grid.hpp"

namespace npaft::bart {

struct ForestPrior {
  double alpha = 0.95;  // split-probability base
  double beta = 2.0;    // depth penalty
  int trees = 200;      // J
  double k = 2.0;       // shrinkage
  double zeta = 4.0;    // node-value scale, 4 * sigma_aft

  // Prior variance of each leaf value: zeta^2 / (4 J k^2).
  double leaf_variance() const { return zeta * zeta / (4.0 * trees * k * k); }
  void validate() const;
};

// alpha * (1 + depth)^(-beta).
double split_prob(int depth, const ForestPrior& prior);

// Half-open range [lo, hi) of cut indices still legal for `var` at a node,
// given the rules of its ancestors.
struct CutRange {
  int lo = 0;
  int hi = 0;
  int size() const { return hi > lo ? hi - lo : 0; }
};

// Cut ranges available at a node (ancestor constraints only; the node's own
// rule is ignored).
class NodeConstraints {
 public:
  NodeConstraints(const Tree& tree, int node, const data::SplitGrid& grid);

  CutRange range(int var) const;
  std::vector<int> splittable_variables() const;
  int splittable_variable_count() const;
  bool can_split() const { return splittable_variable_count() > 0; }

 private:
  struct Bound {
    int var;
    int lo;
    int hi;
  };
  const data::SplitGrid* grid_;
  std::vector<Bound> bounds_;
};

// Log prior of the tree structure and rules: each node splits with
// probability split_prob(depth) when it has a legal rule (never otherwise),
// the split variable is uniform over variables with legal cuts and the cut
// is uniform over the legal range. Returns -inf for trees with illegal rules.
double tree_log_prior(const Tree& tree, const ForestPrior& prior, const data::SplitGrid& grid);

}  // namespace npaft::bart
