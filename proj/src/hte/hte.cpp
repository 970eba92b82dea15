#include "npaft/hte/hte.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "npaft/error.hpp"
#include "npaft/normal_math.hpp"

namespace npaft::hte {

const std::array<const char*, kBenefitBands> kBenefitBandLabels = {
    "(0.99,1]", "(0.95,0.99]", "(0.75,0.95]", "(0.25,0.75]", "[0,0.25]"};

IteDraws ite_from_matrix(std::vector<double> theta, std::size_t count, std::size_t n, Scale scale) {
  if (theta.size() != count * n) throw InputError("hte", "effect matrix has the wrong size");
  IteDraws ite;
  ite.count = count;
  ite.n = n;
  ite.theta = std::move(theta);
  for (double v : ite.theta)
    if (!std::isfinite(v)) throw NumericError("hte", "non-finite treatment effect draw");
  if (scale == Scale::kRatio) {
    ite.ratio.resize(ite.theta.size());
    std::transform(ite.theta.begin(), ite.theta.end(), ite.ratio.begin(), [](double t) { return std::exp(t); });
  }
  return ite;
}

IteDraws ite_draws(const gibbs::PosteriorDraws& draws, Scale scale) {
  std::vector<double> theta(draws.m1.size());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = draws.m1[k] - draws.m0[k];
  return ite_from_matrix(std::move(theta), draws.count, draws.n, scale);
}

const char* evidence_name(Evidence e) {
  switch (e) {
    case Evidence::kStrong: return "strong";
    case Evidence::kMild: return "mild";
    case Evidence::kNone: return "none";
  }
  return "none";
}

Evidence classify(std::size_t c, std::size_t S) {
  if (40 * c <= S || 40 * c >= 39 * S) return Evidence::kStrong;
  if (10 * c < S || 10 * c > 9 * S) return Evidence::kMild;
  return Evidence::kNone;
}

std::vector<double> draw_means(const IteDraws& ite) {
  std::vector<double> out(ite.count);
  for (std::size_t d = 0; d < ite.count; ++d) out[d] = stats::shifted_mean(ite.row(d));
  return out;
}

namespace {

void require_draws(const IteDraws& ite) {
  if (ite.count == 0 || ite.n == 0) throw InputError("hte", "no posterior draws to summarize");
}

DteSummary finish_dte(std::vector<std::size_t> above, std::size_t S) {
  DteSummary out;
  const std::size_t n = above.size();
  out.D.resize(n);
  out.D_star.resize(n);
  out.evidence.resize(n);
  std::size_t strong = 0, mild = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out.D[i] = static_cast<double>(above[i]) / static_cast<double>(S);
    out.D_star[i] = std::max(1.0 - 2.0 * out.D[i], 2.0 * out.D[i] - 1.0);
    out.evidence[i] = classify(above[i], S);
    if (out.evidence[i] == Evidence::kStrong) ++strong;
    if (out.evidence[i] != Evidence::kNone) ++mild;
  }
  out.pct_strong = 100.0 * static_cast<double>(strong) / static_cast<double>(n);
  out.pct_mild = 100.0 * static_cast<double>(mild) / static_cast<double>(n);
  out.above = std::move(above);
  return out;
}

BenefitSummary finish_benefit(const IteDraws& ite, std::vector<std::size_t> positive,
                              std::vector<std::size_t> per_draw, std::vector<std::vector<std::size_t>> eps_counts,
                              std::span<const double> epsilons, double coverage) {
  const std::size_t S = ite.count, n = ite.n;
  const double total = static_cast<double>(S) * static_cast<double>(n);
  BenefitSummary out;
  out.Q.resize(S);
  std::size_t sum_q = 0;
  for (std::size_t d = 0; d < S; ++d) {
    out.Q[d] = static_cast<double>(per_draw[d]) / static_cast<double>(n);
    sum_q += per_draw[d];
  }
  out.Q_mean = static_cast<double>(sum_q) / total;
  out.Q_interval = stats::equal_tailed(out.Q, coverage);
  std::size_t sum_p = 0;
  out.p_hat.resize(n);
  std::array<std::size_t, kBenefitBands> bands{};
  for (std::size_t i = 0; i < n; ++i) {
    out.p_hat[i] = static_cast<double>(positive[i]) / static_cast<double>(S);
    sum_p += positive[i];
    ++bands[benefit_band(positive[i], S)];
  }
  if (sum_p != sum_q) throw NumericError("hte", "benefit counts disagree between draws and patients");
  out.p_hat_mean = static_cast<double>(sum_p) / total;
  for (std::size_t b = 0; b < kBenefitBands; ++b)
    out.band_pct[b] = 100.0 * static_cast<double>(bands[b]) / static_cast<double>(n);
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    std::vector<double> q(S);
    std::size_t sum = 0;
    for (std::size_t d = 0; d < S; ++d) {
      q[d] = static_cast<double>(eps_counts[e][d]) / static_cast<double>(n);
      sum += eps_counts[e][d];
    }
    out.Q_eps.push_back({epsilons[e], static_cast<double>(sum) / total, stats::equal_tailed(q, coverage)});
  }
  out.positive = std::move(positive);
  return out;
}

EffectDistribution finish_cdf(const IteDraws& ite, std::vector<double> grid,
                              const std::vector<std::size_t>& counts, double coverage) {
  const std::size_t S = ite.count, n = ite.n, G = grid.size();
  EffectDistribution out;
  out.H.resize(G);
  out.H_lower.resize(G);
  out.H_upper.resize(G);
  std::vector<double> col(S);
  for (std::size_t g = 0; g < G; ++g) {
    std::size_t total = 0;
    for (std::size_t d = 0; d < S; ++d) {
      total += counts[d * G + g];
      col[d] = static_cast<double>(counts[d * G + g]) / static_cast<double>(n);
    }
    out.H[g] = static_cast<double>(total) / (static_cast<double>(S) * static_cast<double>(n));
    const stats::Interval band = stats::equal_tailed(col, coverage);
    out.H_lower[g] = band.lower;
    out.H_upper[g] = band.upper;
  }
  out.grid = std::move(grid);
  return out;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw InputError("hte", "evaluation grid is empty");
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (!(grid[g] > grid[g - 1])) throw InputError("hte", "evaluation grid must be strictly increasing");
}

void count_row_cdf(std::span<const double> row, std::span<const double> grid, std::size_t* out) {
  std::vector<double> sorted(row.begin(), row.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t g = 0; g < grid.size(); ++g)
    out[g] = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), grid[g]) - sorted.begin());
}

double kernel_sum(const IteDraws& ite, double t, double bandwidth) {
  double total = 0.0;
  const double inv = 1.0 / bandwidth;
  for (double v : ite.theta) {
    const double z = (t - v) * inv;
    total += std::exp(-0.5 * z * z);
  }
  return total * inv / (std::sqrt(2.0 * std::numbers::pi) * static_cast<double>(ite.theta.size()));
}

}  // namespace

DteSummary differential_effect(const IteDraws& ite) {
  require_draws(ite);
  const std::vector<double> mean = draw_means(ite);
  const std::size_t S = ite.count, n = ite.n;
  std::vector<std::size_t> above(n, 0);
  // Patient blocks per thread; each block walks the draws row by row so
  // reads stay contiguous.
  constexpr std::size_t kBlock = 256;
  const auto blocks = static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock, hi = std::min(n, lo + kBlock);
    for (std::size_t d = 0; d < S; ++d) {
      const double* row = ite.theta.data() + d * n;
      for (std::size_t i = lo; i < hi; ++i) above[i] += row[i] >= mean[d];
    }
  }
  return finish_dte(std::move(above), S);
}

std::size_t benefit_band(std::size_t c, std::size_t S) {
  if (100 * c > 99 * S) return 0;
  if (100 * c > 95 * S) return 1;
  if (100 * c > 75 * S) return 2;
  if (100 * c > 25 * S) return 3;
  return 4;
}

BenefitSummary proportion_benefiting(const IteDraws& ite, std::span<const double> epsilons, double coverage) {
  require_draws(ite);
  const std::size_t S = ite.count, n = ite.n, E = epsilons.size();
  std::vector<std::size_t> positive(n, 0), per_draw(S, 0);
  std::vector<std::vector<std::size_t>> eps_counts(E, std::vector<std::size_t>(S, 0));
  const auto draws = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t d = 0; d < draws; ++d) {
    const auto row = ite.row(static_cast<std::size_t>(d));
    std::size_t c = 0;
    for (double v : row) c += v > 0.0;
    per_draw[static_cast<std::size_t>(d)] = c;
    for (std::size_t e = 0; e < E; ++e) {
      std::size_t ce = 0;
      for (double v : row) ce += v > epsilons[e];
      eps_counts[e][static_cast<std::size_t>(d)] = ce;
    }
  }
  constexpr std::size_t kBlock = 256;
  const auto blocks = static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock, hi = std::min(n, lo + kBlock);
    for (std::size_t d = 0; d < S; ++d) {
      const double* row = ite.theta.data() + d * n;
      for (std::size_t i = lo; i < hi; ++i) positive[i] += row[i] > 0.0;
    }
  }
  return finish_benefit(ite, std::move(positive), std::move(per_draw), std::move(eps_counts), epsilons, coverage);
}

double default_bandwidth(const IteDraws& ite) {
  require_draws(ite);
  double sd = 0.0, iqr = 0.0;
  std::vector<double> row;
  for (std::size_t d = 0; d < ite.count; ++d) {
    const auto r = ite.row(d);
    sd += ite.n > 1 ? std::sqrt(stats::variance(r, true)) : 0.0;
    row.assign(r.begin(), r.end());
    std::sort(row.begin(), row.end());
    iqr += stats::quantile_sorted(row, 0.75) - stats::quantile_sorted(row, 0.25);
  }
  sd /= static_cast<double>(ite.count);
  iqr /= static_cast<double>(ite.count);
  return 0.9 * std::min(sd, iqr / 1.34) * std::pow(static_cast<double>(ite.n), -0.2);
}

EffectDistribution effect_cdf(const IteDraws& ite, std::vector<double> grid, double coverage) {
  require_draws(ite);
  check_grid(grid);
  const std::size_t S = ite.count, G = grid.size();
  std::vector<std::size_t> counts(S * G);
  const auto draws = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t d = 0; d < draws; ++d)
    count_row_cdf(ite.row(static_cast<std::size_t>(d)), grid, counts.data() + static_cast<std::size_t>(d) * G);
  return finish_cdf(ite, std::move(grid), counts, coverage);
}

std::vector<double> effect_density(const IteDraws& ite, std::span<const double> grid, double bandwidth) {
  if (!(bandwidth > 0.0)) throw NumericError("hte", "kernel bandwidth must be positive");
  std::vector<double> out(grid.size());
  const auto G = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t g = 0; g < G; ++g)
    out[static_cast<std::size_t>(g)] = kernel_sum(ite, grid[static_cast<std::size_t>(g)], bandwidth);
  return out;
}

EffectDistribution effect_distribution(const IteDraws& ite, std::vector<double> grid,
                                       std::optional<double> bandwidth, double coverage) {
  const double lambda = bandwidth ? *bandwidth : default_bandwidth(ite);
  if (!(lambda > 0.0)) throw NumericError("hte", "kernel bandwidth must be positive");
  EffectDistribution out = effect_cdf(ite, std::move(grid), coverage);
  out.bandwidth = lambda;
  out.h = effect_density(ite, out.grid, lambda);
  return out;
}

std::vector<double> default_effect_grid(const IteDraws& ite, std::size_t points, double margin) {
  require_draws(ite);
  const auto [lo, hi] = std::minmax_element(ite.theta.begin(), ite.theta.end());
  double a = *lo - margin, b = *hi + margin;
  // near-constant effects would give a grid finer than double spacing
  if (!(b - a > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}))) {
    a -= 1.0;
    b += 1.0;
  }
  std::vector<double> grid(points);
  for (std::size_t g = 0; g < points; ++g)
    grid[g] = a + (b - a) * static_cast<double>(g) / static_cast<double>(points - 1);
  return grid;
}

std::vector<int> allocate(const IteDraws& ite, AllocationRule rule) {
  require_draws(ite);
  const std::size_t S = ite.count, n = ite.n;
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rule == AllocationRule::kMisclassification) {
      std::size_t c = 0;
      for (std::size_t d = 0; d < S; ++d) c += ite.at(d, i) > 0.0;
      out[i] = 2 * c > S ? 1 : 0;
    } else {
      double pos = 0.0, neg = 0.0;
      for (std::size_t d = 0; d < S; ++d) {
        const double v = ite.at(d, i);
        if (v > 0.0) pos += v;
        else neg -= v;
      }
      out[i] = pos > neg ? 1 : 0;
    }
  }
  return out;
}

IteSummary summarize_ite(const IteDraws& ite, double coverage) {
  require_draws(ite);
  const std::size_t S = ite.count, n = ite.n;
  IteSummary out;
  out.mean.resize(n);
  out.lower.resize(n);
  out.upper.resize(n);
  out.variance.resize(n);
  std::vector<double> col(S);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < S; ++d) col[d] = ite.at(d, i);
    out.mean[i] = stats::shifted_mean(col);
    out.variance[i] = S > 1 ? stats::variance(col, true) : 0.0;
    const stats::Interval iv = stats::equal_tailed(col, coverage);
    out.lower[i] = iv.lower;
    out.upper[i] = iv.upper;
  }
  return out;
}

double survival_at(double t, double m, std::span<const double> pi, std::span<const double> tau, double sigma) {
  const double lt = std::log(t);
  double s = 0.0;
  for (std::size_t h = 0; h < pi.size(); ++h)
    if (pi[h] > 0.0) s += pi[h] * normal::sf((lt - m - tau[h]) / sigma);
  return s;
}

namespace {

Band band_from(std::vector<double> x, const std::vector<double>& values, std::size_t S, double coverage) {
  const std::size_t G = x.size();
  Band b;
  b.mean.resize(G);
  b.lower.resize(G);
  b.upper.resize(G);
  std::vector<double> col(S);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t d = 0; d < S; ++d) col[d] = values[d * G + g];
    b.mean[g] = stats::shifted_mean(col);
    const stats::Interval iv = stats::equal_tailed(col, coverage);
    b.lower[g] = iv.lower;
    b.upper[g] = iv.upper;
  }
  b.x = std::move(x);
  return b;
}

void check_times(std::span<const double> times) {
  check_grid(times);
  if (!(times.front() > 0.0)) throw InputError("hte", "survival times must be positive");
}

}  // namespace

Band survival_curve(const gibbs::PosteriorDraws& draws, std::span<const double> m_per_draw,
                    std::vector<double> times, double coverage) {
  check_times(times);
  if (m_per_draw.size() != draws.count) throw InputError("hte", "one m value per draw is required");
  const std::size_t S = draws.count, G = times.size();
  std::vector<double> values(S * G);
  for (std::size_t d = 0; d < S; ++d)
    for (std::size_t g = 0; g < G; ++g)
      values[d * G + g] = survival_at(times[g], m_per_draw[d], draws.pi_row(d), draws.tau_row(d), draws.sigma[d]);
  return band_from(std::move(times), values, S, coverage);
}

Band average_survival_curve(const gibbs::PosteriorDraws& draws, int arm, std::vector<double> times,
                            double coverage, std::vector<double>* per_draw) {
  check_times(times);
  const std::size_t S = draws.count, G = times.size(), n = draws.n;
  std::vector<double> values(S * G);
  const auto ndraws = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t sd = 0; sd < ndraws; ++sd) {
    const auto d = static_cast<std::size_t>(sd);
    const auto m = arm == 1 ? draws.m1_row(d) : draws.m0_row(d);
    for (std::size_t g = 0; g < G; ++g) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += survival_at(times[g], m[i], draws.pi_row(d), draws.tau_row(d), draws.sigma[d]);
      values[d * G + g] = s / static_cast<double>(n);
    }
  }
  Band b = band_from(std::move(times), values, S, coverage);
  if (per_draw) *per_draw = std::move(values);
  return b;
}

std::vector<double> default_time_grid(const data::EncodedDataset& data, std::size_t points) {
  const auto [lo, hi] = std::minmax_element(data.y.begin(), data.y.end());
  const double a = std::log(*lo), b = std::log(*hi);
  std::vector<double> grid(points);
  for (std::size_t g = 0; g < points; ++g)
    grid[g] = std::exp(points == 1 ? a : a + (b - a) * static_cast<double>(g) / static_cast<double>(points - 1));
  return grid;
}

PartialDependence partial_dependence(const gibbs::PosteriorDraws& draws, const data::EncodedDataset& data,
                                     std::size_t covariate, std::vector<double> grid, double coverage) {
  if (draws.forests.size() != draws.count)
    throw ConfigError("hte", "forest checkpoints absent; refit with retain_forests enabled");
  if (covariate >= data.p) throw InputError("hte", "covariate index out of range");
  if (data.size() != draws.n) throw InputError("hte", "dataset does not match the draws");
  check_grid(grid);
  PartialDependence out;
  out.covariate = covariate;
  const std::vector<double> col = data.column(covariate);
  const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
  out.extrapolated = grid.front() < *lo || grid.back() > *hi;

  const std::size_t S = draws.count, G = grid.size(), n = data.size(), width = data.p + 1;
  std::vector<double> values(S * G);
  const auto ndraws = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t sd = 0; sd < ndraws; ++sd) {
    const auto d = static_cast<std::size_t>(sd);
    const bart::CompactForest& f = draws.forests[d];
    std::vector<double> u(width);
    for (std::size_t g = 0; g < G; ++g) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        std::copy(x.begin(), x.end(), u.begin() + 1);
        u[covariate + 1] = grid[g];
        u[0] = 1.0;
        const double f1 = f.predict_using(u, static_cast<int>(data::kTreatmentColumn));
        u[0] = 0.0;
        const double f0 = f.predict_using(u, static_cast<int>(data::kTreatmentColumn));
        total += f1 - f0;
      }
      values[d * G + g] = total / static_cast<double>(n);
    }
  }
  out.band = band_from(std::move(grid), values, S, coverage);
  return out;
}

VirtualTwins virtual_twins_rank(std::span<const double> theta_mean, std::span<const double> theta_var,
                                const data::EncodedDataset& data) {
  const std::size_t n = data.size(), p = data.p;
  if (theta_mean.size() != n || theta_var.size() != n) throw InputError("hte", "effect summaries do not match the data");
  if (n < p + 1) throw InputError("hte", "virtual twins needs at least p + 1 patients");
  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd y(n), sw(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(theta_var[i] > 0.0)) throw NumericError("hte", "zero posterior variance for row " + std::to_string(i));
    sw(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(theta_var[i]);
    y(static_cast<Eigen::Index>(i)) = theta_mean[i];
  }
  X.col(0).setOnes();
  for (std::size_t k = 0; k < p; ++k) {
    const std::vector<double> col = data.column(k);
    const double mean = stats::shifted_mean(col);
    const double sd = std::sqrt(stats::variance(col, false));
    for (std::size_t i = 0; i < n; ++i)
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) = sd > 0.0 ? (col[i] - mean) / sd : 0.0;
  }
  const Eigen::MatrixXd Xw = sw.asDiagonal() * X;
  const Eigen::VectorXd yw = sw.asDiagonal() * y;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
  if (qr.rank() < static_cast<Eigen::Index>(p + 1)) {
    // Name every column that adds nothing to the span of the ones before it.
    std::string bad;
    Eigen::MatrixXd kept(n, 0);
    for (std::size_t k = 0; k <= p; ++k) {
      Eigen::MatrixXd trial(n, kept.cols() + 1);
      trial << kept, Xw.col(static_cast<Eigen::Index>(k));
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> q(trial);
      if (q.rank() < trial.cols()) {
        if (!bad.empty()) bad += ", ";
        bad += k == 0 ? std::string("(intercept)") : data.column_names[k - 1];
      } else {
        kept = trial;
      }
    }
    throw NumericError("hte", "singular virtual-twins design; collinear columns: " + bad);
  }
  const Eigen::VectorXd beta = qr.solve(yw);
  VirtualTwins out;
  out.intercept = beta(0);
  for (std::size_t k = 0; k < p; ++k)
    out.ranked.push_back({data.column_names[k], k, beta(static_cast<Eigen::Index>(k + 1))});
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const RankedCoefficient& a, const RankedCoefficient& b) { return std::abs(a.coef) > std::abs(b.coef); });
  return out;
}

VirtualTwins virtual_twins_rank(const IteDraws& ite, const data::EncodedDataset& data) {
  const IteSummary s = summarize_ite(ite);
  return virtual_twins_rank(s.mean, s.variance, data);
}

namespace reference {

DteSummary differential_effect(const IteDraws& ite) {
  require_draws(ite);
  const std::size_t S = ite.count, n = ite.n;
  std::vector<std::size_t> above(n, 0);
  for (std::size_t d = 0; d < S; ++d) {
    double shift = ite.at(d, 0), acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += ite.at(d, i) - shift;
    const double mean = shift + acc / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) above[i] += ite.at(d, i) >= mean;
  }
  return finish_dte(std::move(above), S);
}

BenefitSummary proportion_benefiting(const IteDraws& ite, std::span<const double> epsilons, double coverage) {
  require_draws(ite);
  const std::size_t S = ite.count, n = ite.n;
  std::vector<std::size_t> positive(n, 0), per_draw(S, 0);
  std::vector<std::vector<std::size_t>> eps_counts(epsilons.size(), std::vector<std::size_t>(S, 0));
  for (std::size_t d = 0; d < S; ++d)
    for (std::size_t i = 0; i < n; ++i) {
      const double v = ite.at(d, i);
      if (v > 0.0) {
        ++positive[i];
        ++per_draw[d];
      }
      for (std::size_t e = 0; e < epsilons.size(); ++e) eps_counts[e][d] += v > epsilons[e];
    }
  return finish_benefit(ite, std::move(positive), std::move(per_draw), std::move(eps_counts), epsilons, coverage);
}

std::vector<double> effect_density(const IteDraws& ite, std::span<const double> grid, double bandwidth) {
  if (!(bandwidth > 0.0)) throw NumericError("hte", "kernel bandwidth must be positive");
  std::vector<double> out;
  for (double t : grid) out.push_back(kernel_sum(ite, t, bandwidth));
  return out;
}

EffectDistribution effect_cdf(const IteDraws& ite, std::vector<double> grid, double coverage) {
  require_draws(ite);
  check_grid(grid);
  const std::size_t S = ite.count, G = grid.size(), n = ite.n;
  std::vector<std::size_t> counts(S * G, 0);
  for (std::size_t d = 0; d < S; ++d)
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t i = 0; i < n; ++i) counts[d * G + g] += ite.at(d, i) <= grid[g];
  return finish_cdf(ite, std::move(grid), counts, coverage);
}

}  // namespace reference

}  // namespace npaft::hte
