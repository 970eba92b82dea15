#pragma once

#include <array>
#include <span>
#include <vector>

#include "npaft/bart/tree.hpp"
#include "npaft/bart/tree_prior.hpp"
#include "npaft/data/split_grid.hpp"
#include "npaft/rng.hpp"

namespace npaft::bart {

enum class MoveType { kGrow = 0, kPrune = 1, kChange = 2, kSwap = 3 };
inline constexpr std::size_t kMoveTypeCount = 4;
const char* move_name(MoveType m);

struct MoveProbabilities {
  double grow = 0.25;
  double prune = 0.25;
  double change = 0.40;
  double swap = 0.10;
  double of(MoveType m) const;
};

struct TreeProposal {
  Tree tree;
  MoveType move = MoveType::kGrow;
  // False when the drawn move type has no legal target; the draw is a no-op.
  bool valid = false;
  int node = -1;
  // log q(current | proposal) - log q(proposal | current).
  double log_proposal_ratio = 0.0;
};

TreeProposal propose_tree_move(const Tree& tree, const data::SplitGrid& grid, Rng& rng,
                               const MoveProbabilities& moves = {});

// Sufficient statistics of the partial residuals falling in one leaf.
struct LeafStats {
  double count = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

// log of the integral over mu of prod_i N(r_i; mu, sigma^2) * N(mu; 0, s2),
// s2 = prior.leaf_variance(), in closed form.
double leaf_log_marginal(const LeafStats& stats, double sigma, const ForestPrior& prior);

// Leaf id of every row (node ids of `tree`).
void assign_leaves(const Tree& tree, const data::BinnedDesign& design, std::vector<int>& leaf_of_row);

// Statistics indexed by node id; entries for internal/dead nodes are zero.
std::vector<LeafStats> leaf_statistics(const Tree& tree, std::span<const int> leaf_of_row,
                                       std::span<const double> residuals);

// Sum of leaf_log_marginal over leaves; -inf if any leaf is empty.
double tree_log_marginal(const Tree& tree, std::span<const LeafStats> stats, double sigma,
                         const ForestPrior& prior);

struct MhOutcome {
  MoveType move = MoveType::kGrow;
  bool valid = false;
  bool accepted = false;
  double log_acceptance = 0.0;  // log of the (unclipped) MH ratio
};

// One Metropolis-Hastings step on the tree structure with leaf values
// integrated out. On acceptance `tree` and `leaf_of_row` describe the new
// structure; leaf values still need draw_leaf_values.
MhOutcome mh_update_tree(Tree& tree, std::vector<int>& leaf_of_row,
                         std::span<const double> partial_residuals,
                         const data::BinnedDesign& design, double sigma,
                         const ForestPrior& prior, const data::SplitGrid& grid, Rng& rng,
                         const MoveProbabilities& moves = {});

// MH log ratio for moving from `current` to `proposal` given residuals.
double mh_log_ratio(const Tree& current, std::span<const LeafStats> current_stats,
                    const TreeProposal& proposal, std::span<const LeafStats> proposal_stats,
                    double sigma, const ForestPrior& prior, const data::SplitGrid& grid);

struct LeafPosterior {
  double mean = 0.0;
  double variance = 0.0;
};
LeafPosterior leaf_posterior(const LeafStats& stats, double sigma, const ForestPrior& prior);

// Draws each leaf value from its conjugate normal posterior.
void draw_leaf_values(Tree& tree, std::span<const int> leaf_of_row,
                      std::span<const double> partial_residuals, double sigma,
                      const ForestPrior& prior, Rng& rng);

}  // namespace npaft::bart
