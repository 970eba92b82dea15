#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "npaft/data/dataset.hpp"
#include "npaft/gibbs/engine.hpp"
#include "npaft/stats.hpp"

namespace npaft::hte {

enum class Scale { kLog, kRatio };

// count x n matrix of theta(x_i) = m1 - m0 per draw; ratio holds exp(theta)
// when requested.
struct IteDraws {
  std::size_t count = 0;
  std::size_t n = 0;
  std::vector<double> theta;
  std::vector<double> ratio;

  std::span<const double> row(std::size_t d) const { return {theta.data() + d * n, n}; }
  double at(std::size_t d, std::size_t i) const { return theta[d * n + i]; }
};

IteDraws ite_draws(const gibbs::PosteriorDraws& draws, Scale scale = Scale::kLog);
IteDraws ite_from_matrix(std::vector<double> theta, std::size_t count, std::size_t n,
                         Scale scale = Scale::kLog);

enum class Evidence { kNone = 0, kMild = 1, kStrong = 2 };
const char* evidence_name(Evidence e);

struct DteSummary {
  std::vector<std::size_t> above;  // #draws with theta_i >= per-draw mean
  std::vector<double> D;
  std::vector<double> D_star;
  std::vector<Evidence> evidence;
  double pct_strong = 0.0;  // percent of patients, mild includes strong
  double pct_mild = 0.0;
};

// Evidence class from the integer count c out of S draws:
// strong iff D <= 0.025 or D >= 0.975, mild iff D < 0.1 or D > 0.9.
Evidence classify(std::size_t c, std::size_t S);

// Per-draw average treatment effect over patients.
std::vector<double> draw_means(const IteDraws& ite);

DteSummary differential_effect(const IteDraws& ite);

struct EffectDistribution {
  std::vector<double> grid;
  std::vector<double> H;
  std::vector<double> H_lower, H_upper;
  std::vector<double> h;
  double bandwidth = 0.0;
};

// 0.9 * min(sd, IQR / 1.34) * n^(-1/5) from posterior means of the per-draw
// spread of theta across patients.
double default_bandwidth(const IteDraws& ite);

EffectDistribution effect_distribution(const IteDraws& ite, std::vector<double> grid,
                                       std::optional<double> bandwidth = std::nullopt,
                                       double coverage = 0.95);
// H only, without the density.
EffectDistribution effect_cdf(const IteDraws& ite, std::vector<double> grid, double coverage = 0.95);
std::vector<double> effect_density(const IteDraws& ite, std::span<const double> grid, double bandwidth);

// Evenly spaced grid covering all draws with a margin of 3 bandwidths.
std::vector<double> default_effect_grid(const IteDraws& ite, std::size_t points, double margin);

inline constexpr std::array<double, 3> kDefaultEpsilons{0.0, 0.1, 0.25};
inline constexpr std::size_t kBenefitBands = 5;
extern const std::array<const char*, kBenefitBands> kBenefitBandLabels;

struct QEpsilon {
  double epsilon = 0.0;
  double mean = 0.0;
  stats::Interval interval;
};

struct BenefitSummary {
  std::vector<double> Q;  // per draw
  double Q_mean = 0.0;
  stats::Interval Q_interval;
  std::vector<QEpsilon> Q_eps;
  std::vector<std::size_t> positive;  // per patient #draws with theta > 0
  std::vector<double> p_hat;
  double p_hat_mean = 0.0;
  std::array<double, kBenefitBands> band_pct{};
};

// Band index of p = c/S: 0 (0.99,1], 1 (0.95,0.99], 2 (0.75,0.95],
// 3 (0.25,0.75], 4 [0,0.25].
std::size_t benefit_band(std::size_t c, std::size_t S);

BenefitSummary proportion_benefiting(const IteDraws& ite,
                                     std::span<const double> epsilons = kDefaultEpsilons,
                                     double coverage = 0.95);

enum class AllocationRule { kMisclassification, kWeighted };
std::vector<int> allocate(const IteDraws& ite, AllocationRule rule);

struct IteSummary {
  std::vector<double> mean, lower, upper, variance;
};
IteSummary summarize_ite(const IteDraws& ite, double coverage = 0.95);

struct Band {
  std::vector<double> x;
  std::vector<double> mean, lower, upper;
};

// S(t) = sum_h pi_h (1 - Phi((log t - m - tau_h)/sigma)) for one draw.
double survival_at(double t, double m, std::span<const double> pi, std::span<const double> tau,
                   double sigma);
// Per-draw m values supplied by the caller (e.g. from predict_m).
Band survival_curve(const gibbs::PosteriorDraws& draws, std::span<const double> m_per_draw,
                    std::vector<double> times, double coverage = 0.95);
// Population-averaged curve for one arm over the training rows.
// `per_draw`, when given, receives the count x times matrix of curves.
Band average_survival_curve(const gibbs::PosteriorDraws& draws, int arm, std::vector<double> times,
                            double coverage = 0.95, std::vector<double>* per_draw = nullptr);
// Geometric grid spanning the observed follow-up times.
std::vector<double> default_time_grid(const data::EncodedDataset& data, std::size_t points);

struct PartialDependence {
  Band band;
  std::size_t covariate = 0;
  bool extrapolated = false;
};
// rho_l(z) = mean_i theta(z, x_{i,-l}) per draw; needs retained forests.
PartialDependence partial_dependence(const gibbs::PosteriorDraws& draws, const data::EncodedDataset& data,
                                     std::size_t covariate, std::vector<double> grid,
                                     double coverage = 0.95);

struct RankedCoefficient {
  std::string name;
  std::size_t column = 0;
  double coef = 0.0;
};
struct VirtualTwins {
  double intercept = 0.0;
  std::vector<RankedCoefficient> ranked;  // by |coef|, descending
};
// WLS of posterior mean theta on z-scored covariates, weights 1/posterior var.
VirtualTwins virtual_twins_rank(std::span<const double> theta_mean, std::span<const double> theta_var,
                                const data::EncodedDataset& data);
VirtualTwins virtual_twins_rank(const IteDraws& ite, const data::EncodedDataset& data);

// Serial implementations kept as the test oracle for the parallel kernels.
namespace reference {
DteSummary differential_effect(const IteDraws& ite);
BenefitSummary proportion_benefiting(const IteDraws& ite, std::span<const double> epsilons = kDefaultEpsilons,
                                     double coverage = 0.95);
std::vector<double> effect_density(const IteDraws& ite, std::span<const double> grid, double bandwidth);
EffectDistribution effect_cdf(const IteDraws& ite, std::vector<double> grid, double coverage = 0.95);
}  // namespace reference

}  // namespace npaft::hte
