#pragma once

#include <span>
#include <vector>

namespace npaft::stats {

// Sample quantile with linear interpolation between order statistics
// (Hyndman-Fan type 7). `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double prob);
double quantile(std::vector<double> values, double prob);

// Mean computed as x0 + mean(x - x0): exact for constant input.
double shifted_mean(std::span<const double> values);
double variance(std::span<const double> values, bool sample = true);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Equal-tailed interval at the given coverage, e.g. 0.95.
Interval equal_tailed(std::vector<double> values, double coverage);

}  // namespace npaft::stats
