#pragma once

#include <functional>
#include <span>
#include <vector>

#include "npaft/data/dataset.hpp"
#include "npaft/gibbs/engine.hpp"
#include "npaft/rng.hpp"

namespace npaft::sim {

struct MetricRow {
  double rmse = 0.0;
  double mcprop = 0.0;
  double coverage = 0.0;
  double pct_strong = 0.0;  // percent
  double pct_mild = 0.0;
};

MetricRow score_replication(std::span<const double> true_theta, std::span<const double> theta_hat,
                            std::span<const double> lower, std::span<const double> upper,
                            std::span<const int> allocation, double pct_strong = 0.0, double pct_mild = 0.0);

// Right-continuous Kaplan-Meier estimate of P(X > t) from (time, event).
class KaplanMeier {
 public:
  KaplanMeier(std::span<const double> time, std::span<const int> event);
  double at(double t) const;      // S(t)
  double before(double t) const;  // S(t-)
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> times_;   // distinct event times
  std::vector<double> values_;  // S just after each time
};

inline constexpr double kCensoringWeightFloor = 1e-3;

// Censoring survivor G(t-) per row from the KM fit to (Y, 1 - delta).
// Values below the floor are clamped with a warning.
std::vector<double> censoring_weights(const data::EncodedDataset& data);

// Fold label per row: a seeded permutation dealt round-robin into K folds.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t K, std::uint64_t seed);

// Returns m-hat(A_i, x_i) on the log-time scale for every row of `test`.
using FitPredict =
    std::function<std::vector<double>(const data::EncodedDataset& train, const data::EncodedDataset& test)>;

struct CvResult {
  std::vector<double> fold_scores;
  double mean = 0.0;
};

// Mean over folds of (1/n_k) sum_{i in fold} delta_i / G(Y_i-) |log Y_i - m-hat_i|.
CvResult cross_validation_score(const data::EncodedDataset& data, std::size_t K, std::uint64_t seed,
                                const FitPredict& fit_predict);
// Same score from fixed folds and weights.
double fold_score(std::span<const double> log_y, std::span<const int> delta, std::span<const double> weight,
                  std::span<const double> prediction);

// Posterior-mean m at each test row's own arm, from a BART fit on `train`.
FitPredict bart_fit_predict(const gibbs::FitConfig& config);

}  // namespace npaft::sim
