#include "npaft/normal_math.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>

namespace npaft::normal {

namespace {
const boost::math::normal_distribution<double> kStd(0.0, 1.0);
constexpr double kAsymptoticStart = 30.0;
}  // namespace

double pdf(double z) { return std::exp(log_pdf(z)); }

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double log_sf(double z) {
  if (z < kAsymptoticStart) return std::log(sf(z));
  // Mills-ratio series: sf(z) ~ phi(z)/z * (1 - 1/z^2 + 3/z^4 - 15/z^6).
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return log_pdf(z) - std::log(z) + std::log(series);
}

double inverse_mills(double z) {
  if (z < kAsymptoticStart) {
    const double s = sf(z);
    if (s > 0.0) return pdf(z) / s;
  }
  return std::exp(log_pdf(z) - log_sf(z));
}

double quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(kStd, p);
}

double quantile_upper(double p) {
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  if (p >= 1.0) return -std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::complement(kStd, p));
}

}  // namespace npaft::normal
