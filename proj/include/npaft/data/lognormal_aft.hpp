#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "npaft/data/dataset.hpp"

namespace npaft::data {

// Smallest residual scale reported by the lognormal fits. Degenerate
// (zero-variance) inputs are clamped here instead of failing.
inline constexpr double kMinAftSigma = 1e-6;

struct AftFitOptions {
  int max_iterations = 200;
  // Applied to the gradient of the per-observation mean log-likelihood.
  double gradient_tolerance = 1e-10;
};

// Maximum-likelihood fit of log T = design * coef + sigma * Z, Z ~ N(0,1),
// with right-censored rows contributing log(1 - Phi(z)).
struct LognormalAftFit {
  Eigen::VectorXd coef;
  double sigma = 1.0;
  // Inverse observed information for (coef, log sigma).
  Eigen::MatrixXd covariance;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool sigma_clamped = false;
};

LognormalAftFit fit_lognormal_aft(const Eigen::MatrixXd& design,
                                  std::span<const double> log_time,
                                  std::span<const int> delta,
                                  const AftFitOptions& options = {});

double lognormal_aft_log_likelihood(const Eigen::MatrixXd& design,
                                    std::span<const double> log_time,
                                    std::span<const int> delta,
                                    const Eigen::VectorXd& coef, double sigma);

struct ResponseTransform {
  double mu_aft = 0.0;     // log-time units
  double sigma_aft = 1.0;  // log-time units
  bool sigma_clamped = false;
};

ResponseTransform fit_intercept_lognormal_aft(const EncodedDataset& data,
                                              const AftFitOptions& options = {});

// y_tr = y * exp(-mu_aft); status and covariates unchanged.
EncodedDataset transform_responses(const EncodedDataset& data, const ResponseTransform& t);

// Linear lognormal AFT with treatment and (optionally) treatment-covariate
// interactions. Used as the parametric baseline.
struct ParametricAftResult {
  LognormalAftFit fit;
  bool interactions = true;
  std::vector<double> ite;     // per-row estimated treatment effect
  std::vector<double> ite_se;  // delta-method standard errors
  double average_ite = 0.0;
  double average_ite_se = 0.0;

  // Predicted mean log time for arm a and covariates x.
  double predict(int a, std::span<const double> x) const;
};

ParametricAftResult fit_parametric_aft(const EncodedDataset& data, bool interactions = true,
                                       const AftFitOptions& options = {});

}  // namespace npaft::data
