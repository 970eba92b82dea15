#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "npaft/rng.hpp"

namespace npaft::cdp {

struct CdpHyper {
  double psi1 = 2.0;
  double psi2 = 0.1;
  double nu = 3.0;
  double q = 0.5;
  std::size_t H = 50;
  double sigma_tau_sq = 1.0;  // also the scale kappa of the sigma^2 prior

  void validate() const;
};

// Truncated stick-breaking state. Labels are 0-based.
struct CdpState {
  std::vector<double> V;
  std::vector<double> pi;
  std::vector<double> tau_star;
  double mu_gstar = 0.0;
  std::vector<double> tau;
  double M = 1.0;
  double sigma_sq = 1.0;
  std::vector<int> S;
  std::vector<std::size_t> n_h;

  std::size_t H() const { return V.size(); }
  double sigma() const;
  std::size_t occupied() const;
  // 1-based index of the highest occupied component.
  std::size_t max_occupied_index() const;
  // Checks weight sum, mean-zero and count invariants.
  void check(double tol = 1e-10) const;
};

CdpState init_state(std::size_t n, const CdpHyper& hyper, double sigma_w_hat);

// pi_h = V_h prod_{k<h} (1 - V_k); the last component absorbs the remainder.
void weights_from_sticks(std::span<const double> V, std::span<double> pi);
void recenter(CdpState& state);
void tabulate_counts(CdpState& state);

// S_i = h with probability proportional to w_h phi((r_i - a_h)/sigma),
// evaluated in log space.
void sample_labels(std::span<const double> w, std::span<const double> atoms, double sigma,
                   std::span<const double> r, std::span<int> labels, Rng& rng);

void update_cluster_labels(CdpState& state, std::span<const double> r, Rng& rng);
void update_stick_weights(CdpState& state, Rng& rng);
// Conjugate draws of the raw atoms only.
void draw_locations(CdpState& state, std::span<const double> r, double sigma_tau_sq, Rng& rng);
void update_cluster_locations(CdpState& state, std::span<const double> r, const CdpHyper& hyper,
                              Rng& rng);

inline constexpr double kStickClamp = 1.0 - 1e-12;

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;
};
GammaParams mass_posterior(const CdpState& state, const CdpHyper& hyper);
// Inverse-gamma (shape, scale) for sigma^2.
GammaParams scale_posterior(const CdpState& state, std::span<const double> r,
                            const CdpHyper& hyper);
void update_mass_and_scale(CdpState& state, std::span<const double> r, const CdpHyper& hyper,
                           Rng& rng);

// Censored rows get log z ~ N(m_i + tau_{S_i}, sigma^2) truncated to
// (log_y_i, inf); events pass through. Returns the number of imputed rows.
std::size_t impute_censored(const CdpState& state, std::span<const double> m_values,
                            std::span<const double> log_y, std::span<const int> delta,
                            std::span<double> complete, Rng& rng);

double residual_density(double w, const CdpState& state);
double residual_density(double w, std::span<const double> pi, std::span<const double> tau,
                        double sigma);

}  // namespace npaft::cdp
