#pragma once

// Scalar standard-normal helpers with tail-stable forms.

namespace npaft::normal {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double pdf(double z);
double log_pdf(double z);
double cdf(double z);
// Upper tail 1 - Phi(z), accurate for large z.
double sf(double z);
double log_sf(double z);
// phi(z) / (1 - Phi(z)).
double inverse_mills(double z);
double quantile(double p);
// z such that sf(z) == p; accurate for tiny p.
double quantile_upper(double p);

}  // namespace npaft::normal
