#include "npaft/sim/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "npaft/error.hpp"

namespace npaft::sim {

MetricRow score_replication(std::span<const double> truth, std::span<const double> est, std::span<const double> lower,
                            std::span<const double> upper, std::span<const int> alloc, double pct_strong,
                            double pct_mild) {
  const std::size_t n = truth.size();
  if (n == 0 || est.size() != n || lower.size() != n || upper.size() != n || alloc.size() != n)
    throw InputError("sim", "score inputs have mismatched lengths");
  MetricRow r;
  double se = 0.0, wrong = 0.0, covered = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    se += (est[i] - truth[i]) * (est[i] - truth[i]);
    wrong += truth[i] <= 0.0 ? alloc[i] : 1 - alloc[i];
    covered += lower[i] <= truth[i] && truth[i] <= upper[i];
  }
  const double dn = static_cast<double>(n);
  r.rmse = std::sqrt(se / dn);
  r.mcprop = wrong / dn;
  r.coverage = covered / dn;
  r.pct_strong = pct_strong;
  r.pct_mild = pct_mild;
  return r;
}

KaplanMeier::KaplanMeier(std::span<const double> time, std::span<const int> event) {
  const std::size_t n = time.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });
  double s = 1.0;
  std::size_t at_risk = n, k = 0;
  while (k < n) {
    const double t = time[order[k]];
    std::size_t deaths = 0, tied = 0;
    while (k + tied < n && time[order[k + tied]] == t) {
      deaths += event[order[k + tied]] != 0;
      ++tied;
    }
    if (deaths > 0) {
      s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      times_.push_back(t);
      values_.push_back(s);
    }
    at_risk -= tied;
    k += tied;
  }
}

double KaplanMeier::at(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return it == times_.begin() ? 1.0 : values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double KaplanMeier::before(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  return it == times_.begin() ? 1.0 : values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

std::vector<double> censoring_weights(const data::EncodedDataset& data) {
  std::vector<int> cens(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) cens[i] = 1 - data.delta[i];
  const KaplanMeier km(data.y, cens);
  std::vector<double> w(data.size());
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    w[i] = km.before(data.y[i]);
    if (data.delta[i] == 1 && w[i] < kCensoringWeightFloor) {
      w[i] = kCensoringWeightFloor;
      ++clamped;
    }
  }
  if (clamped > 0) spdlog::warn("crossval: {} censoring weights clamped at {}", clamped, kCensoringWeightFloor);
  return w;
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t K, std::uint64_t seed) {
  if (K < 2) throw ConfigError("sim", "cross-validation needs at least 2 folds");
  if (n < K) throw InputError("sim", "fewer rows than folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(StreamId::kFolds)});
  for (std::size_t k = n; k > 1; --k) std::swap(perm[k - 1], perm[rng.index(k)]);
  std::vector<std::size_t> fold(n);
  for (std::size_t k = 0; k < n; ++k) fold[perm[k]] = k % K;
  return fold;
}

double fold_score(std::span<const double> log_y, std::span<const int> delta, std::span<const double> weight,
                  std::span<const double> prediction) {
  double s = 0.0;
  for (std::size_t i = 0; i < log_y.size(); ++i)
    if (delta[i] == 1) s += std::abs(log_y[i] - prediction[i]) / weight[i];
  return s / static_cast<double>(log_y.size());
}

CvResult cross_validation_score(const data::EncodedDataset& data, std::size_t K, std::uint64_t seed,
                                const FitPredict& fit_predict) {
  const std::vector<std::size_t> fold = assign_folds(data.size(), K, seed);
  const std::vector<double> weight = censoring_weights(data);
  CvResult out;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == k ? test : train).push_back(i);
    const data::EncodedDataset tr = data::subset(data, train);
    const data::EncodedDataset te = data::subset(data, test);
    if (tr.event_count() == 0)
      throw InputError("sim", "fold " + std::to_string(k + 1) + " has no events in its training part");
    if (te.event_count() == 0) throw InputError("sim", "fold " + std::to_string(k + 1) + " has zero events");
    const std::vector<double> pred = fit_predict(tr, te);
    std::vector<double> log_y(test.size()), w(test.size());
    for (std::size_t j = 0; j < test.size(); ++j) {
      log_y[j] = std::log(te.y[j]);
      w[j] = weight[test[j]];
    }
    out.fold_scores.push_back(fold_score(log_y, te.delta, w, pred));
  }
  double acc = 0.0;
  for (double s : out.fold_scores) acc += s;
  out.mean = acc / static_cast<double>(K);
  return out;
}

FitPredict bart_fit_predict(const gibbs::FitConfig& config) {
  return [config](const data::EncodedDataset& train, const data::EncodedDataset& test) {
    gibbs::FitConfig cfg = config;
    cfg.retain_forests = true;
    const gibbs::PosteriorDraws draws = gibbs::fit(train, cfg);
    std::vector<double> out(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
      const std::vector<double> m = gibbs::predict_m(draws, test.arm[i], test.row(i));
      double acc = 0.0;
      for (double v : m) acc += v;
      out[i] = acc / static_cast<double>(m.size());
    }
    return out;
  };
}

}  // namespace npaft::sim
