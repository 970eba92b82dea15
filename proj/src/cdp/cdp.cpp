#include "npaft/cdp/cdp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "npaft/cdp/truncated_normal.hpp"
#include "npaft/error.hpp"
#include "npaft/normal_math.hpp"

namespace npaft::cdp {

void CdpHyper::validate() const {
  auto bad = [](const std::string& what) { throw ConfigError("cdp", what); };
  if (!(psi1 > 0.0) || !(psi2 > 0.0)) bad("psi1 and psi2 must be positive");
  if (!(nu > 0.0)) bad("nu must be positive");
  if (!(q > 0.0 && q < 1.0)) bad("q must lie in (0, 1)");
  if (H < 2) bad("truncation level H must be at least 2");
  if (!(sigma_tau_sq > 0.0)) bad("sigma_tau_sq must be positive");
}

double CdpState::sigma() const { return std::sqrt(sigma_sq); }

std::size_t CdpState::occupied() const {
  return static_cast<std::size_t>(std::count_if(n_h.begin(), n_h.end(), [](std::size_t c) { return c > 0; }));
}

std::size_t CdpState::max_occupied_index() const {
  for (std::size_t h = n_h.size(); h > 0; --h)
    if (n_h[h - 1] > 0) return h;
  return 0;
}

void CdpState::check(double tol) const {
  double total = 0.0, mean = 0.0;
  for (std::size_t h = 0; h < pi.size(); ++h) {
    if (pi[h] < 0.0) throw NumericError("cdp", "negative mixture weight");
    total += pi[h];
    mean += pi[h] * tau[h];
  }
  if (std::abs(total - 1.0) > tol) throw NumericError("cdp", "weights do not sum to one");
  if (std::abs(mean) > tol) throw NumericError("cdp", "mixture mean is not zero");
  std::size_t count = 0;
  for (std::size_t c : n_h) count += c;
  if (count != S.size()) throw NumericError("cdp", "cluster counts out of sync");
  if (!(sigma_sq > 0.0) || !(M > 0.0)) throw NumericError("cdp", "nonpositive M or sigma^2");
}

void weights_from_sticks(std::span<const double> V, std::span<double> pi) {
  const std::size_t H = V.size();
  double remaining = 1.0;
  for (std::size_t h = 0; h + 1 < H; ++h) {
    pi[h] = V[h] * remaining;
    remaining *= 1.0 - V[h];
  }
  double used = 0.0;
  for (std::size_t h = 0; h + 1 < H; ++h) used += pi[h];
  pi[H - 1] = std::max(0.0, 1.0 - used);
  // The products can overshoot 1 by a few ulps when the stick runs out
  // early; push the leftover into the last or the largest weight until the
  // left-to-right sum is exactly 1.
  const std::size_t big = static_cast<std::size_t>(std::max_element(pi.begin(), pi.end()) - pi.begin());
  for (int pass = 0; pass < 8; ++pass) {
    double s = 0.0;
    for (double w : pi) s += w;
    if (s == 1.0) break;
    const double gap = 1.0 - s;
    if (pi[H - 1] + gap >= 0.0) pi[H - 1] += gap;
    else pi[big] += gap;
  }
}

void recenter(CdpState& s) {
  double mu = 0.0;
  for (std::size_t h = 0; h < s.H(); ++h) mu += s.pi[h] * s.tau_star[h];
  s.mu_gstar = mu;
  for (std::size_t h = 0; h < s.H(); ++h) s.tau[h] = s.tau_star[h] - mu;
  // One correction pass removes the rounding left by the subtraction.
  double resid = 0.0;
  for (std::size_t h = 0; h < s.H(); ++h) resid += s.pi[h] * s.tau[h];
  for (std::size_t h = 0; h < s.H(); ++h) s.tau[h] -= resid;
}

void tabulate_counts(CdpState& s) {
  std::fill(s.n_h.begin(), s.n_h.end(), 0);
  for (int label : s.S) ++s.n_h[static_cast<std::size_t>(label)];
}

CdpState init_state(std::size_t n, const CdpHyper& hyper, double sigma_w_hat) {
  hyper.validate();
  const std::size_t H = hyper.H;
  CdpState s;
  s.M = hyper.psi1 / hyper.psi2;
  s.V.assign(H, 1.0 / (1.0 + s.M));
  s.V[H - 1] = 1.0;
  s.pi.assign(H, 0.0);
  weights_from_sticks(s.V, s.pi);
  s.tau_star.assign(H, 0.0);
  s.tau.assign(H, 0.0);
  s.mu_gstar = 0.0;
  s.sigma_sq = 0.5 * sigma_w_hat * sigma_w_hat;
  s.S.assign(n, 0);
  s.n_h.assign(H, 0);
  s.n_h[0] = n;
  return s;
}

void sample_labels(std::span<const double> w, std::span<const double> atoms, double sigma,
                   std::span<const double> r, std::span<int> labels, Rng& rng) {
  const std::size_t H = w.size();
  std::vector<double> logw(H), lp(H);
  for (std::size_t h = 0; h < H; ++h)
    logw[h] = w[h] > 0.0 ? std::log(w[h]) : -INFINITY;
  const double inv = 1.0 / sigma;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double top = -INFINITY;
    for (std::size_t h = 0; h < H; ++h) {
      const double z = (r[i] - atoms[h]) * inv;
      lp[h] = logw[h] - 0.5 * z * z;
      top = std::max(top, lp[h]);
    }
    double total = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      lp[h] = std::exp(lp[h] - top);
      total += lp[h];
    }
    double u = rng.uniform() * total;
    std::size_t pick = H - 1;
    for (std::size_t h = 0; h < H; ++h) {
      if (u < lp[h]) {
        pick = h;
        break;
      }
      u -= lp[h];
    }
    // Rounding can leave u just past the last positive mass.
    while (lp[pick] == 0.0 && pick > 0) --pick;
    labels[i] = static_cast<int>(pick);
  }
}

void update_cluster_labels(CdpState& s, std::span<const double> r, Rng& rng) {
  sample_labels(s.pi, s.tau, s.sigma(), r, s.S, rng);
  tabulate_counts(s);
}

void update_stick_weights(CdpState& s, Rng& rng) {
  const std::size_t H = s.H();
  std::size_t above = 0;
  for (std::size_t c : s.n_h) above += c;
  for (std::size_t h = 0; h + 1 < H; ++h) {
    above -= s.n_h[h];
    s.V[h] = rng.beta(1.0 + static_cast<double>(s.n_h[h]), s.M + static_cast<double>(above));
  }
  s.V[H - 1] = 1.0;
  weights_from_sticks(s.V, s.pi);
}

void draw_locations(CdpState& s, std::span<const double> r, double sigma_tau_sq, Rng& rng) {
  const std::size_t H = s.H();
  std::vector<double> sums(H, 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) sums[static_cast<std::size_t>(s.S[i])] += r[i];
  for (std::size_t h = 0; h < H; ++h) {
    const double denom = static_cast<double>(s.n_h[h]) * sigma_tau_sq + s.sigma_sq;
    const double mean = sigma_tau_sq * sums[h] / denom;
    const double var = sigma_tau_sq * s.sigma_sq / denom;
    s.tau_star[h] = rng.normal(mean, std::sqrt(var));
  }
}

void update_cluster_locations(CdpState& s, std::span<const double> r, const CdpHyper& hyper,
                              Rng& rng) {
  draw_locations(s, r, hyper.sigma_tau_sq, rng);
  recenter(s);
}

GammaParams mass_posterior(const CdpState& s, const CdpHyper& hyper) {
  double log_rest = 0.0;
  for (std::size_t h = 0; h + 1 < s.H(); ++h) log_rest += std::log1p(-std::min(s.V[h], kStickClamp));
  return {hyper.psi1 + static_cast<double>(s.H()) - 1.0, hyper.psi2 - log_rest};
}

GammaParams scale_posterior(const CdpState& s, std::span<const double> r, const CdpHyper& hyper) {
  double ss = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double d = r[i] - s.tau[static_cast<std::size_t>(s.S[i])];
    ss += d * d;
  }
  return {0.5 * (hyper.nu + static_cast<double>(r.size())), 0.5 * (ss + hyper.sigma_tau_sq * hyper.nu)};
}

void update_mass_and_scale(CdpState& s, std::span<const double> r, const CdpHyper& hyper,
                           Rng& rng) {
  const GammaParams m = mass_posterior(s, hyper);
  s.M = rng.gamma(m.shape, m.rate);
  const GammaParams v = scale_posterior(s, r, hyper);
  s.sigma_sq = v.rate / rng.gamma(v.shape, 1.0);
}

std::size_t impute_censored(const CdpState& s, std::span<const double> m_values,
                            std::span<const double> log_y, std::span<const int> delta,
                            std::span<double> complete, Rng& rng) {
  const double sd = s.sigma();
  std::size_t imputed = 0;
  for (std::size_t i = 0; i < log_y.size(); ++i) {
    if (delta[i] == 1) {
      complete[i] = log_y[i];
      continue;
    }
    const double mean = m_values[i] + s.tau[static_cast<std::size_t>(s.S[i])];
    complete[i] = draw_truncated_normal(mean, sd, log_y[i], rng);
    ++imputed;
  }
  return imputed;
}

double residual_density(double w, std::span<const double> pi, std::span<const double> tau,
                        double sigma) {
  double total = 0.0;
  for (std::size_t h = 0; h < pi.size(); ++h) total += pi[h] * normal::pdf((w - tau[h]) / sigma);
  return total / sigma;
}

double residual_density(double w, const CdpState& s) {
  return residual_density(w, s.pi, s.tau, s.sigma());
}

}  // namespace npaft::cdp
