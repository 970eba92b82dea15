#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "npaft/data/dataset.hpp"
#include "npaft/rng.hpp"

namespace npaft::sim {

enum class ResidualFamily { kNormal, kGumbel, kStdGamma, kTMixture };
const char* family_name(ResidualFamily f);
ResidualFamily parse_family(const std::string& s);

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kStdGammaShape = 2.0;
inline constexpr double kTDegrees = 3.0;

// Mean-zero draws with variance sd^2.
double draw_residual(ResidualFamily family, double sd, Rng& rng);
std::vector<double> gen_residuals(ResidualFamily family, std::size_t n, double sd, Rng& rng);

// Simulated survival data with the true log-time effect per row.
struct SimData {
  data::EncodedDataset data;  // uncensored until apply_censoring
  std::vector<double> log_t;  // true log failure times
  std::vector<double> true_theta;
  double censored_fraction = 0.0;
};

// log T = b0 + b1 A + sum_k b_k x_k + W with continuous N(0,1) and binary
// Bernoulli(1/2) covariates; theta is b1 for every row.
struct LinearCoefs {
  double beta0 = 1.0;
  double beta1 = 0.2;
  std::vector<double> continuous{0.3, -0.2, 0.1, 0.0, 0.15};
  std::vector<double> binary{0.25, -0.1, 0.2};
  // Treatment-covariate interactions (fixed-regression only), one per
  // covariate in the order continuous then binary; empty means none.
  std::vector<double> interactions;
};

SimData gen_linear(const LinearCoefs& coefs, ResidualFamily family, double sd, std::size_t n, Rng& rng);
SimData gen_null_aft(const LinearCoefs& coefs, ResidualFamily family, double sd, std::size_t n, Rng& rng);

// Proportional hazards with a Weibull baseline:
// T = scale * (-log U / exp(eta))^(1/shape), so theta = -b1 / shape.
struct WeibullBaseline {
  double shape = 1.5;
  double scale = 5.0;
};
SimData gen_null_cox(const LinearCoefs& coefs, const WeibullBaseline& baseline, std::size_t n, Rng& rng);

// Random-function scenario: m(A, x) = F0(x) + A theta(x) where each function
// is a weighted sum of Gaussian bumps on random covariate subsets.
struct Bump {
  double weight = 0.0;
  std::vector<int> vars;
  Eigen::VectorXd mu;
  Eigen::MatrixXd V;
  Eigen::MatrixXd U;
  double eval(const double* x) const;
};
struct FriedmanFunctions {
  std::vector<Bump> baseline;  // 10 terms, weights U(-1, 1)
  std::vector<Bump> effect;    // 5 terms, weights U(-0.2, 0.3)
  std::size_t p = 20;
  double F0(const double* x) const;
  double theta(const double* x) const;
};
struct FriedmanOptions {
  std::size_t p = 20;
  std::size_t baseline_terms = 10;
  std::size_t effect_terms = 5;
  double noise_sd = 0.5;
  ResidualFamily family = ResidualFamily::kNormal;
  bool null_effect = false;  // forces all effect weights to 0
};
// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, signs fixed).
Eigen::MatrixXd random_orthogonal(std::size_t k, Rng& rng);
FriedmanFunctions gen_friedman_functions(const FriedmanOptions& opt, Rng& rng);
SimData gen_friedman_scenario(const FriedmanFunctions& f, const FriedmanOptions& opt, std::size_t n, Rng& rng);

enum class Censoring { kNone, kLight, kHeavy };
const char* censoring_name(Censoring c);
Censoring parse_censoring(const std::string& s);
double censoring_target(Censoring c, double light = 0.20, double heavy = 0.45);

// Rate lambda with mean_i P(C < T_i) = target for C ~ Exp(lambda).
double calibrate_censoring_rate(const std::vector<double>& t, double target);
// Y = min(T, C), delta = 1{T <= C}.
void apply_censoring(SimData& sim, double target, Rng& rng);
void apply_censoring(SimData& sim, Censoring level, Rng& rng);

}  // namespace npaft::sim
