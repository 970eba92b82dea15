#include "npaft/cdp/truncated_normal.hpp"

#include <cmath>

#include "npaft/normal_math.hpp"

namespace npaft::cdp {

namespace {

// Robert (1995): translated exponential proposal with the optimal rate.
double tail_rejection(double alpha, Rng& rng) {
  const double rate = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (;;) {
    const double z = alpha + rng.exponential(rate);
    const double d = z - rate;
    if (rng.uniform_open() <= std::exp(-0.5 * d * d)) return z;
  }
}

}  // namespace

double draw_standard_tail(double alpha, Rng& rng) {
  double z;
  if (alpha > kTailSwitch) {
    z = tail_rejection(alpha, rng);
  } else {
    const double tail = normal::sf(alpha);
    z = normal::quantile_upper(tail * rng.uniform_open());
  }
  if (!(z > alpha)) z = std::nextafter(alpha, INFINITY);
  return z;
}

double draw_truncated_normal(double mean, double sd, double lower, Rng& rng) {
  const double alpha = (lower - mean) / sd;
  double x = mean + sd * draw_standard_tail(alpha, rng);
  if (!(x > lower)) x = std::nextafter(lower, INFINITY);
  return x;
}

double truncated_normal_mean(double mean, double sd, double lower) {
  return mean + sd * normal::inverse_mills((lower - mean) / sd);
}

}  // namespace npaft::cdp
