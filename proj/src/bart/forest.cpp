#include "npaft/bart/forest.hpp"

#include <algorithm>
#include <cmath>

namespace npaft::bart {

Forest::Forest(std::size_t trees, std::size_t rows)
    : trees_(trees), leaf_of_row_(trees, std::vector<int>(rows, Tree::kRoot)), fit_(rows, 0.0) {}

void Forest::set_tree(std::size_t j, Tree tree, const data::BinnedDesign& design) {
  trees_[j] = std::move(tree);
  assign_leaves(trees_[j], design, leaf_of_row_[j]);
  refresh_fit();
}

std::vector<double> Forest::recompute_fit() const {
  std::vector<double> m(fit_.size(), 0.0);
  for (std::size_t j = 0; j < trees_.size(); ++j) {
    const Tree& t = trees_[j];
    const auto& leaf = leaf_of_row_[j];
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += t.node(leaf[i]).value;
  }
  return m;
}

void Forest::refresh_fit() { fit_ = recompute_fit(); }

double Forest::cache_discrepancy() const {
  const std::vector<double> m = recompute_fit();
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) worst = std::max(worst, std::abs(m[i] - fit_[i]));
  return worst;
}

double Forest::predict(std::span<const double> u) const {
  double total = 0.0;
  for (const Tree& t : trees_) total += t.predict(u);
  return total;
}

double Forest::predict_binned(const std::uint16_t* bins) const {
  double total = 0.0;
  for (const Tree& t : trees_) total += t.node(t.find_leaf(bins)).value;
  return total;
}

double tree_predict(const Tree& tree, std::span<const double> u) { return tree.predict(u); }

double forest_predict(const Forest& forest, std::span<const double> u) {
  return forest.predict(u);
}

void MoveCounts::merge(const MoveCounts& other) {
  for (std::size_t k = 0; k < kMoveTypeCount; ++k) {
    proposed[k] += other.proposed[k];
    accepted[k] += other.accepted[k];
  }
}

struct SweepAccess {
  static void sweep(Forest& f, std::span<const double> targets, double sigma,
                    const ForestPrior& prior, const data::SplitGrid& grid,
                    const data::BinnedDesign& design, Rng& move_rng, Rng& leaf_rng,
                    MoveCounts& counts, const MoveProbabilities& moves) {
    const std::size_t n = f.fit_.size();
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = targets[i] - f.fit_[i];
    std::vector<double> partial(n);
    for (std::size_t j = 0; j < f.trees_.size(); ++j) {
      Tree& tree = f.trees_[j];
      std::vector<int>& leaf = f.leaf_of_row_[j];
      for (std::size_t i = 0; i < n; ++i) partial[i] = resid[i] + tree.node(leaf[i]).value;

      const MhOutcome step =
          mh_update_tree(tree, leaf, partial, design, sigma, prior, grid, move_rng, moves);
      if (step.valid) {
        ++counts.proposed[static_cast<std::size_t>(step.move)];
        if (step.accepted) ++counts.accepted[static_cast<std::size_t>(step.move)];
      }
      draw_leaf_values(tree, leaf, partial, sigma, prior, leaf_rng);
      for (std::size_t i = 0; i < n; ++i) resid[i] = partial[i] - tree.node(leaf[i]).value;
    }
    f.refresh_fit();
  }
};

void backfit_sweep(Forest& forest, std::span<const double> targets, double sigma,
                   const ForestPrior& prior, const data::SplitGrid& grid,
                   const data::BinnedDesign& design, Rng& move_rng, Rng& leaf_rng,
                   MoveCounts& counts, const MoveProbabilities& moves) {
  SweepAccess::sweep(forest, targets, sigma, prior, grid, design, move_rng, leaf_rng, counts,
                     moves);
}

void predict_both_arms(const Forest& forest, const data::BinnedDesign& design,
                       const data::SplitGrid& grid, std::span<const int> arms,
                       std::span<double> m0, std::span<double> m1) {
  const std::size_t n = design.n;
  const std::span<const double> fit = forest.fit();
  const std::uint16_t bin0 = grid.bin(data::kTreatmentColumn, 0.0);
  const std::uint16_t bin1 = grid.bin(data::kTreatmentColumn, 1.0);
  std::vector<double> other(fit.begin(), fit.end());
  std::vector<std::uint16_t> row(design.width);
  for (std::size_t j = 0; j < forest.size(); ++j) {
    const Tree& t = forest.tree(j);
    if (!t.uses_variable(static_cast<int>(data::kTreatmentColumn))) continue;
    const auto leaf = forest.leaf_of_row(j);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(design.row(i), design.width, row.begin());
      row[data::kTreatmentColumn] = arms[i] == 1 ? bin0 : bin1;
      other[i] += t.node(t.find_leaf(row.data())).value - t.node(leaf[i]).value;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    m0[i] = arms[i] == 0 ? fit[i] : other[i];
    m1[i] = arms[i] == 1 ? fit[i] : other[i];
  }
}

}  // namespace npaft::bart
