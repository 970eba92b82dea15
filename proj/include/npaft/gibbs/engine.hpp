#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "npaft/bart/compact.hpp"
#include "npaft/bart/tree_moves.hpp"
#include "npaft/bart/tree_prior.hpp"
#include "npaft/cdp/calibration.hpp"
#include "npaft/cdp/cdp.hpp"
#include "npaft/data/dataset.hpp"
#include "npaft/data/lognormal_aft.hpp"

namespace npaft::gibbs {

struct FitConfig {
  std::size_t iterations = 7000;
  std::size_t burn_in = 2000;
  std::size_t thin = 1;
  std::uint64_t seed = 0;
  cdp::CdpHyper hyper;
  bart::ForestPrior prior;
  std::size_t chains = 1;
  std::size_t calibration_draws = cdp::kCalibrationDraws;
  std::size_t max_cuts = 100;
  bool retain_forests = false;

  void validate() const;
  std::size_t retained_per_chain() const;
};

nlohmann::json to_json(const FitConfig& c);
// Missing keys keep their defaults; unknown keys are a ConfigError.
FitConfig fit_config_from_json(const nlohmann::json& j);

enum class Step { kBackfit = 1, kLabels, kSticks, kLocations, kMassScale, kImpute };
const char* step_name(Step s);

struct TraceEvent {
  std::size_t chain = 0;
  std::size_t iteration = 0;
  Step step = Step::kBackfit;
  // Complete log responses (transformed scale) after the step.
  std::span<const double> complete;
};
using TraceFn = std::function<void(const TraceEvent&)>;

struct DrawDiagnostics {
  std::size_t chain = 0;
  std::size_t iteration = 0;
  bart::MoveCounts moves;  // counts for this sweep
  std::size_t occupied = 0;
  std::size_t max_index = 0;
};

struct PosteriorDraws {
  std::size_t n = 0;
  std::size_t H = 0;
  std::size_t count = 0;
  // count x n, original log-time scale.
  std::vector<double> m0, m1;
  // count x H mixture snapshots.
  std::vector<double> pi, tau;
  std::vector<double> sigma, M;
  std::vector<DrawDiagnostics> diagnostics;

  data::ResponseTransform transform;
  cdp::CalibrationResult calibration;
  bart::ForestPrior prior;  // with zeta resolved
  FitConfig config;
  std::vector<bart::MoveCounts> chain_moves;
  double truncation_hit_fraction = 0.0;  // over post-burn-in sweeps

  std::vector<bart::CompactForest> forests;  // per draw, transformed scale

  std::span<const double> m0_row(std::size_t d) const { return {m0.data() + d * n, n}; }
  std::span<const double> m1_row(std::size_t d) const { return {m1.data() + d * n, n}; }
  std::span<const double> pi_row(std::size_t d) const { return {pi.data() + d * H, H}; }
  std::span<const double> tau_row(std::size_t d) const { return {tau.data() + d * H, H}; }
  // m(arm_i, x_i) for the observed arm.
  double m_observed(std::size_t d, std::size_t i, int arm) const {
    return arm == 1 ? m1[d * n + i] : m0[d * n + i];
  }
};

inline constexpr double kTruncationWarnFraction = 0.01;

PosteriorDraws fit(const data::EncodedDataset& data, const FitConfig& config,
                   const TraceFn& trace = {});

// Per-draw m(a, x) on the original scale from retained forests.
std::vector<double> predict_m(const PosteriorDraws& draws, int arm, std::span<const double> x);

}  // namespace npaft::gibbs
