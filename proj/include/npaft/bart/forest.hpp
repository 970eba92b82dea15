#pragma once

#include <array>
#include <span>
#include <vector>

#include "npaft/bart/tree.hpp"
#include "npaft/bart/tree_moves.hpp"
#include "npaft/bart/tree_prior.hpp"
#include "npaft/data/split_grid.hpp"
#include "npaft/rng.hpp"

namespace npaft::bart {

// Sum-of-trees fit m(u) = sum_j g(u; T_j, B_j) over a fixed training design.
// Caches the leaf of every training row for every tree and the per-row
// total.
class Forest {
 public:
  Forest(std::size_t trees, std::size_t rows);

  std::size_t size() const { return trees_.size(); }
  std::size_t rows() const { return fit_.size(); }
  const Tree& tree(std::size_t j) const { return trees_[j]; }
  const std::vector<Tree>& trees() const { return trees_; }
  std::span<const int> leaf_of_row(std::size_t j) const { return leaf_of_row_[j]; }
  // Cached m(A_i, x_i) for the training rows.
  std::span<const double> fit() const { return fit_; }

  // Replaces tree j and re-routes the training rows through it.
  void set_tree(std::size_t j, Tree tree, const data::BinnedDesign& design);
  // Recomputes the cached totals from the leaf values.
  void refresh_fit();
  std::vector<double> recompute_fit() const;
  // max_i |cached - recomputed|.
  double cache_discrepancy() const;

  double predict(std::span<const double> u) const;
  double predict_binned(const std::uint16_t* bins) const;

 private:
  friend struct SweepAccess;
  std::vector<Tree> trees_;
  std::vector<std::vector<int>> leaf_of_row_;
  std::vector<double> fit_;
};

double tree_predict(const Tree& tree, std::span<const double> u);
double forest_predict(const Forest& forest, std::span<const double> u);

struct MoveCounts {
  std::array<std::size_t, kMoveTypeCount> proposed{};
  std::array<std::size_t, kMoveTypeCount> accepted{};
  void merge(const MoveCounts& other);
};

// Bayesian backfitting: for each tree in turn, form the partial residual
// targets - sum_{j' != j} g_j', take one MH structure step, redraw the leaf
// values and fold the new fit back in. The cache is consistent on return.
void backfit_sweep(Forest& forest, std::span<const double> targets, double sigma,
                   const ForestPrior& prior, const data::SplitGrid& grid,
                   const data::BinnedDesign& design, Rng& move_rng, Rng& leaf_rng,
                   MoveCounts& counts, const MoveProbabilities& moves = {});

// m(arm, x_i) for both arms of every training row. Only trees that split on
// the treatment column are re-routed.
void predict_both_arms(const Forest& forest, const data::BinnedDesign& design,
                       const data::SplitGrid& grid, std::span<const int> arms,
                       std::span<double> m0, std::span<double> m1);

}  // namespace npaft::bart
