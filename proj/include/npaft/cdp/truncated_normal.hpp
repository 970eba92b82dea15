#pragma once

#include "npaft/rng.hpp"

namespace npaft::cdp {

// Draw from Normal(mean, sd^2) restricted to (lower, inf). Inverse CDF on the
// upper tail for moderate bounds, exponential-proposal rejection beyond
// kTailSwitch standard deviations. Always returns a finite value > lower.
inline constexpr double kTailSwitch = 5.0;

double draw_truncated_normal(double mean, double sd, double lower, Rng& rng);

// Standardized version: Z ~ N(0,1) | Z > alpha.
double draw_standard_tail(double alpha, Rng& rng);

// E[X | X > lower] for X ~ Normal(mean, sd^2).
double truncated_normal_mean(double mean, double sd, double lower);

}  // namespace npaft::cdp
