#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "npaft/hte/hte.hpp"

namespace npaft::hte {

struct SummaryOptions {
  double coverage = 0.95;
  std::vector<double> epsilons{kDefaultEpsilons.begin(), kDefaultEpsilons.end()};
  std::size_t effect_points = 201;
  std::optional<double> bandwidth;
  std::size_t time_points = 100;
};

struct IdentityReport {
  bool q_mean_matches = false;     // mean Q == mean p_hat, exactly
  bool d_star_matches = false;     // D* == |2D - 1| for every patient
  bool survival_monotone = false;  // every draw, both arms
  bool survival_limits = false;    // S near 1 and 0 at extreme times, to 1e-10
  double max_d_star_error = 0.0;
  double survival_low_gap = 0.0;   // max 1 - S at the lowest time
  double survival_high_value = 0.0;
  bool all() const { return q_mean_matches && d_star_matches && survival_monotone && survival_limits; }
};

struct Summary {
  nlohmann::json json;
  IteSummary ite;
  DteSummary dte;
  BenefitSummary benefit;
  EffectDistribution distribution;
  bool density_available = false;
  Band survival[2];
  IdentityReport identities;
};

// All per-patient and population summaries of a fit. Survival curves are the
// arm-specific curves averaged over the training rows, on a geometric grid
// spanning exp(mu) times the range of the fitted m values.
Summary summarize(const gibbs::PosteriorDraws& draws, const SummaryOptions& options = {});

IdentityReport check_identities(const DteSummary& dte, const BenefitSummary& benefit,
                                const gibbs::PosteriorDraws& draws);

// summary.json, ite.csv, effect_cdf.csv, effect_density.csv, survival.csv.
void write_summary(const std::filesystem::path& dir, const Summary& s);
void write_band_csv(const std::filesystem::path& path, const char* x_name, const Band& b);

}  // namespace npaft::hte
