#include "npaft/cdp/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "npaft/error.hpp"
#include "npaft/stats.hpp"

namespace npaft::cdp {

double draw_scale_factor(const CdpHyper& hyper, Rng& rng) {
  const double M = rng.gamma(hyper.psi1, hyper.psi2);
  const double chi = rng.chi_square(hyper.nu);
  return hyper.nu / chi + rng.normal(1.0, std::sqrt(2.0 / (M + 1.0)));
}

namespace {

void fill_chunk(const CdpHyper& hyper, std::uint64_t seed, std::size_t chunk, double* out,
                std::size_t len) {
  Rng rng = Rng::derive(seed, {static_cast<std::uint64_t>(StreamId::kCalibration), chunk});
  for (std::size_t k = 0; k < len; ++k) out[k] = draw_scale_factor(hyper, rng);
}

std::size_t chunk_count(std::size_t count) {
  return (count + kCalibrationChunk - 1) / kCalibrationChunk;
}

}  // namespace

std::vector<double> scale_factor_draws(const CdpHyper& hyper, std::size_t count,
                                       std::uint64_t seed) {
  std::vector<double> out(count);
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(count));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kCalibrationChunk;
    const std::size_t len = std::min(kCalibrationChunk, count - begin);
    fill_chunk(hyper, seed, static_cast<std::size_t>(c), out.data() + begin, len);
  }
  return out;
}

namespace reference {
std::vector<double> scale_factor_draws(const CdpHyper& hyper, std::size_t count,
                                       std::uint64_t seed) {
  std::vector<double> out(count);
  for (std::size_t c = 0; c < chunk_count(count); ++c) {
    const std::size_t begin = c * kCalibrationChunk;
    fill_chunk(hyper, seed, c, out.data() + begin, std::min(kCalibrationChunk, count - begin));
  }
  return out;
}
}  // namespace reference

CalibrationResult invert_factor_quantile(double sigma_w_hat, double q, std::vector<double> factors) {
  if (!(sigma_w_hat > 0.0)) throw InputError("cdp", "calibration needs a positive residual sd");
  if (factors.empty()) throw ConfigError("cdp", "calibration needs at least one draw");
  CalibrationResult res;
  res.draws = factors.size();
  const auto keep = std::remove_if(factors.begin(), factors.end(), [](double f) { return !(f > 0.0); });
  res.discarded = static_cast<std::size_t>(factors.end() - keep);
  factors.erase(keep, factors.end());
  if (res.discarded > 0) {
    const double frac = static_cast<double>(res.discarded) / static_cast<double>(res.draws);
    if (frac > kMaxDiscardFraction)
      throw NumericError("cdp", "calibration discarded " + std::to_string(res.discarded) + " of " +
                                    std::to_string(res.draws) + " factor draws as nonpositive");
    spdlog::warn("calibration: discarded {} nonpositive factor draws of {}", res.discarded, res.draws);
  }
  std::sort(factors.begin(), factors.end());
  res.factor_quantile = stats::quantile_sorted(factors, q);
  res.sigma_tau_sq = sigma_w_hat * sigma_w_hat / res.factor_quantile;
  return res;
}

CalibrationResult calibrate_scale(double sigma_w_hat, const CdpHyper& hyper, std::size_t mc_draws,
                                  Rng& rng) {
  if (!(sigma_w_hat > 0.0)) throw InputError("cdp", "calibration needs a positive residual sd");
  const std::uint64_t seed = rng.engine()();
  return invert_factor_quantile(sigma_w_hat, hyper.q, scale_factor_draws(hyper, mc_draws, seed));
}

}  // namespace npaft::cdp
