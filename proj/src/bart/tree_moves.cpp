#include "npaft/bart/tree_moves.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace npaft::bart {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<int> growable_leaves(const Tree& tree, const data::SplitGrid& grid) {
  std::vector<int> out;
  for (int id : tree.leaves()) {
    if (NodeConstraints(tree, id, grid).can_split()) out.push_back(id);
  }
  return out;
}

// log of 1 / (#vars * #cuts) for drawing `var`/`cut` at `node`.
double log_rule_draw(const Tree& tree, int node, int var, const data::SplitGrid& grid) {
  NodeConstraints cons(tree, node, grid);
  return -std::log(static_cast<double>(cons.splittable_variable_count())) -
         std::log(static_cast<double>(cons.range(var).size()));
}

MoveType draw_move(Rng& rng, const MoveProbabilities& m) {
  const double u = rng.uniform() * (m.grow + m.prune + m.change + m.swap);
  if (u < m.grow) return MoveType::kGrow;
  if (u < m.grow + m.prune) return MoveType::kPrune;
  if (u < m.grow + m.prune + m.change) return MoveType::kChange;
  return MoveType::kSwap;
}

void draw_rule(const Tree& tree, int node, const data::SplitGrid& grid, Rng& rng, int& var,
               int& cut) {
  NodeConstraints cons(tree, node, grid);
  const std::vector<int> vars = cons.splittable_variables();
  var = vars[rng.index(vars.size())];
  const CutRange r = cons.range(var);
  cut = r.lo + static_cast<int>(rng.index(static_cast<std::size_t>(r.size())));
}
}  // namespace

const char* move_name(MoveType m) {
  switch (m) {
    case MoveType::kGrow: return "grow";
    case MoveType::kPrune: return "prune";
    case MoveType::kChange: return "change";
    case MoveType::kSwap: return "swap";
  }
  return "?";
}

double MoveProbabilities::of(MoveType m) const {
  switch (m) {
    case MoveType::kGrow: return grow;
    case MoveType::kPrune: return prune;
    case MoveType::kChange: return change;
    case MoveType::kSwap: return swap;
  }
  return 0.0;
}

TreeProposal propose_tree_move(const Tree& tree, const data::SplitGrid& grid, Rng& rng,
                               const MoveProbabilities& moves) {
  TreeProposal prop{tree, draw_move(rng, moves), false, -1, 0.0};
  switch (prop.move) {
    case MoveType::kGrow: {
      const std::vector<int> candidates = growable_leaves(tree, grid);
      if (candidates.empty()) return prop;
      const int leaf = candidates[rng.index(candidates.size())];
      int var = 0;
      int cut = 0;
      draw_rule(tree, leaf, grid, rng, var, cut);
      const double log_fwd = std::log(moves.grow) -
                             std::log(static_cast<double>(candidates.size())) +
                             log_rule_draw(tree, leaf, var, grid);
      prop.tree.grow(leaf, var, cut, grid.cuts[var][cut]);
      const double log_rev = std::log(moves.prune) -
                             std::log(static_cast<double>(prop.tree.nog_nodes().size()));
      prop.valid = true;
      prop.node = leaf;
      prop.log_proposal_ratio = log_rev - log_fwd;
      return prop;
    }
    case MoveType::kPrune: {
      const std::vector<int> candidates = tree.nog_nodes();
      if (candidates.empty()) return prop;
      const int node = candidates[rng.index(candidates.size())];
      const double log_fwd = std::log(moves.prune) -
                             std::log(static_cast<double>(candidates.size()));
      const int var = tree.node(node).var;
      prop.tree.prune(node);
      const double log_rev = std::log(moves.grow) -
                             std::log(static_cast<double>(growable_leaves(prop.tree, grid).size())) +
                             log_rule_draw(prop.tree, node, var, grid);
      prop.valid = true;
      prop.node = node;
      prop.log_proposal_ratio = log_rev - log_fwd;
      return prop;
    }
    case MoveType::kChange: {
      const std::vector<int> candidates = tree.internal_nodes();
      if (candidates.empty()) return prop;
      const int node = candidates[rng.index(candidates.size())];
      const int old_var = tree.node(node).var;
      int var = 0;
      int cut = 0;
      draw_rule(tree, node, grid, rng, var, cut);
      const double log_fwd = log_rule_draw(tree, node, var, grid);
      const double log_rev = log_rule_draw(tree, node, old_var, grid);
      TreeNode& nd = prop.tree.node(node);
      nd.var = var;
      nd.cut = cut;
      nd.threshold = grid.cuts[var][cut];
      prop.valid = true;
      prop.node = node;
      prop.log_proposal_ratio = log_rev - log_fwd;
      return prop;
    }
    case MoveType::kSwap: {
      const auto pairs = tree.internal_pairs();
      if (pairs.empty()) return prop;
      const auto [parent, child] = pairs[rng.index(pairs.size())];
      TreeNode& p = prop.tree.node(parent);
      TreeNode& c = prop.tree.node(child);
      std::swap(p.var, c.var);
      std::swap(p.cut, c.cut);
      std::swap(p.threshold, c.threshold);
      prop.valid = true;
      prop.node = parent;
      prop.log_proposal_ratio = 0.0;
      return prop;
    }
  }
  return prop;
}

double leaf_log_marginal(const LeafStats& s, double sigma, const ForestPrior& prior) {
  const double s2 = sigma * sigma;
  const double t2 = prior.leaf_variance();
  const double denom = s2 + s.count * t2;
  return -0.5 * s.count * std::log(2.0 * std::numbers::pi * s2) - 0.5 * s.sum_sq / s2 +
         0.5 * std::log(s2 / denom) + 0.5 * t2 * s.sum * s.sum / (s2 * denom);
}

void assign_leaves(const Tree& tree, const data::BinnedDesign& design,
                   std::vector<int>& leaf_of_row) {
  leaf_of_row.resize(design.n);
  for (std::size_t i = 0; i < design.n; ++i) leaf_of_row[i] = tree.find_leaf(design.row(i));
}

std::vector<LeafStats> leaf_statistics(const Tree& tree, std::span<const int> leaf_of_row,
                                       std::span<const double> residuals) {
  std::vector<LeafStats> stats(tree.pool_size());
  for (std::size_t i = 0; i < leaf_of_row.size(); ++i) {
    LeafStats& s = stats[leaf_of_row[i]];
    const double r = residuals[i];
    s.count += 1.0;
    s.sum += r;
    s.sum_sq += r * r;
  }
  return stats;
}

double tree_log_marginal(const Tree& tree, std::span<const LeafStats> stats, double sigma,
                         const ForestPrior& prior) {
  double total = 0.0;
  for (int id : tree.leaves()) {
    if (stats[id].count == 0.0) return kNegInf;
    total += leaf_log_marginal(stats[id], sigma, prior);
  }
  return total;
}

double mh_log_ratio(const Tree& current, std::span<const LeafStats> current_stats,
                    const TreeProposal& proposal, std::span<const LeafStats> proposal_stats,
                    double sigma, const ForestPrior& prior, const data::SplitGrid& grid) {
  const double ll_new = tree_log_marginal(proposal.tree, proposal_stats, sigma, prior);
  if (ll_new == kNegInf) return kNegInf;
  const double lp_new = tree_log_prior(proposal.tree, prior, grid);
  if (lp_new == kNegInf) return kNegInf;
  const double ll_old = tree_log_marginal(current, current_stats, sigma, prior);
  const double lp_old = tree_log_prior(current, prior, grid);
  return (lp_new - lp_old) + (ll_new - ll_old) + proposal.log_proposal_ratio;
}

MhOutcome mh_update_tree(Tree& tree, std::vector<int>& leaf_of_row,
                         std::span<const double> partial_residuals,
                         const data::BinnedDesign& design, double sigma,
                         const ForestPrior& prior, const data::SplitGrid& grid, Rng& rng,
                         const MoveProbabilities& moves) {
  TreeProposal prop = propose_tree_move(tree, grid, rng, moves);
  MhOutcome out{prop.move, prop.valid, false, kNegInf};
  if (!prop.valid) return out;

  std::vector<int> new_leaf(leaf_of_row.size());
  switch (prop.move) {
    case MoveType::kGrow: {
      const TreeNode& nd = prop.tree.node(prop.node);
      for (std::size_t i = 0; i < leaf_of_row.size(); ++i) {
        const int l = leaf_of_row[i];
        new_leaf[i] = l != prop.node ? l
                      : design.row(i)[nd.var] <= nd.cut ? nd.left
                                                         : nd.right;
      }
      break;
    }
    case MoveType::kPrune: {
      const TreeNode& nd = tree.node(prop.node);
      for (std::size_t i = 0; i < leaf_of_row.size(); ++i) {
        const int l = leaf_of_row[i];
        new_leaf[i] = (l == nd.left || l == nd.right) ? prop.node : l;
      }
      break;
    }
    default:
      for (std::size_t i = 0; i < leaf_of_row.size(); ++i) {
        new_leaf[i] = prop.tree.find_leaf(design.row(i));
      }
      break;
  }

  const auto cur_stats = leaf_statistics(tree, leaf_of_row, partial_residuals);
  const auto new_stats = leaf_statistics(prop.tree, new_leaf, partial_residuals);
  out.log_acceptance = mh_log_ratio(tree, cur_stats, prop, new_stats, sigma, prior, grid);
  if (out.log_acceptance == kNegInf) return out;
  if (out.log_acceptance >= 0.0 || std::log(rng.uniform_open()) < out.log_acceptance) {
    tree = std::move(prop.tree);
    leaf_of_row.swap(new_leaf);
    out.accepted = true;
  }
  return out;
}

LeafPosterior leaf_posterior(const LeafStats& s, double sigma, const ForestPrior& prior) {
  const double s2 = sigma * sigma;
  const double t2 = prior.leaf_variance();
  const double denom = s.count * t2 + s2;
  return {t2 * s.sum / denom, t2 * s2 / denom};
}

void draw_leaf_values(Tree& tree, std::span<const int> leaf_of_row,
                      std::span<const double> partial_residuals, double sigma,
                      const ForestPrior& prior, Rng& rng) {
  const auto stats = leaf_statistics(tree, leaf_of_row, partial_residuals);
  for (int id : tree.leaves()) {
    const LeafPosterior post = leaf_posterior(stats[id], sigma, prior);
    tree.node(id).value = rng.normal(post.mean, std::sqrt(post.variance));
  }
}

}  // namespace npaft::bart
