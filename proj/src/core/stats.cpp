#include "npaft/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace npaft::stats {

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted.front();
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> values, double prob) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, prob);
}

double shifted_mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double x0 = values.front();
  double acc = 0.0;
  for (double v : values) acc += v - x0;
  return x0 + acc / static_cast<double>(values.size());
}

double variance(std::span<const double> values, bool sample) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mean = shifted_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(sample ? n - 1 : n);
}

Interval equal_tailed(std::vector<double> values, double coverage) {
  std::sort(values.begin(), values.end());
  const double tail = 0.5 * (1.0 - coverage);
  return {quantile_sorted(values, tail), quantile_sorted(values, 1.0 - tail)};
}

}  // namespace npaft::stats
