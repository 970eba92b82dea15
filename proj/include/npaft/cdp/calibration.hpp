#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "npaft/cdp/cdp.hpp"
#include "npaft/rng.hpp"

namespace npaft::cdp {

inline constexpr std::size_t kCalibrationDraws = 1'000'000;
inline constexpr std::size_t kCalibrationChunk = 65'536;
inline constexpr double kMaxDiscardFraction = 0.10;

struct CalibrationResult {
  double sigma_tau_sq = 0.0;
  double factor_quantile = 0.0;
  std::size_t draws = 0;
  std::size_t discarded = 0;
};

// One draw of nu/chi2_nu + N(1, 2/(M+1)) with M ~ Gamma(psi1, psi2).
double draw_scale_factor(const CdpHyper& hyper, Rng& rng);

// Fills factor draws in fixed chunks, each from its own derived stream, so
// the multiset of values does not depend on thread count.
std::vector<double> scale_factor_draws(const CdpHyper& hyper, std::size_t count,
                                       std::uint64_t seed);

// sigma_tau^2 = sigma_w_hat^2 / (q-quantile of the positive factor draws).
CalibrationResult calibrate_scale(double sigma_w_hat, const CdpHyper& hyper,
                                  std::size_t mc_draws, Rng& rng);

// Quantile inversion on a given set of factor draws. Discards nonpositive
// values; throws if more than 10% are discarded.
CalibrationResult invert_factor_quantile(double sigma_w_hat, double q, std::vector<double> factors);

namespace reference {
std::vector<double> scale_factor_draws(const CdpHyper& hyper, std::size_t count,
                                       std::uint64_t seed);
}

}  // namespace npaft::cdp
