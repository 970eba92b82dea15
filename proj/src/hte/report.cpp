#include "npaft/hte/report.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "npaft/error.hpp"

namespace npaft::hte {

namespace {

constexpr double kLimitTolerance = 1e-10;
constexpr double kTailSds = 12.0;

struct Span {
  double lo = INFINITY;
  double hi = -INFINITY;
};

Span fitted_range(const gibbs::PosteriorDraws& d) {
  Span s;
  for (double v : d.m0) s.lo = std::min(s.lo, v), s.hi = std::max(s.hi, v);
  for (double v : d.m1) s.lo = std::min(s.lo, v), s.hi = std::max(s.hi, v);
  return s;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> geometric(double log_lo, double log_hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(k) / static_cast<double>(points - 1));
  return g;
}

// Extreme log-times where every mixture component is kTailSds sds away.
std::pair<double, double> extreme_log_times(const gibbs::PosteriorDraws& d) {
  const Span m = fitted_range(d);
  const double tau = max_abs(d.tau);
  const double sigma = *std::max_element(d.sigma.begin(), d.sigma.end());
  return {m.lo - tau - kTailSds * sigma, m.hi + tau + kTailSds * sigma};
}

nlohmann::json interval_json(const stats::Interval& iv) { return nlohmann::json::array({iv.lower, iv.upper}); }

}  // namespace

IdentityReport check_identities(const DteSummary& dte, const BenefitSummary& benefit,
                                const gibbs::PosteriorDraws& draws) {
  IdentityReport r;
  r.q_mean_matches = benefit.Q_mean == benefit.p_hat_mean;
  r.d_star_matches = true;
  for (std::size_t i = 0; i < dte.D.size(); ++i) {
    const double err = std::abs(dte.D_star[i] - std::abs(2.0 * dte.D[i] - 1.0));
    r.max_d_star_error = std::max(r.max_d_star_error, err);
    if (err != 0.0) r.d_star_matches = false;
  }

  const auto [lo, hi] = extreme_log_times(draws);
  std::vector<double> times = geometric(lo, hi, 64);
  r.survival_monotone = true;
  r.survival_limits = true;
  for (int arm = 0; arm < 2; ++arm) {
    std::vector<double> curves;
    average_survival_curve(draws, arm, times, 0.95, &curves);
    const std::size_t G = times.size();
    for (std::size_t d = 0; d < draws.count; ++d) {
      const double* c = curves.data() + d * G;
      for (std::size_t g = 1; g < G; ++g)
        if (c[g] > c[g - 1]) r.survival_monotone = false;
      r.survival_low_gap = std::max(r.survival_low_gap, 1.0 - c[0]);
      r.survival_high_value = std::max(r.survival_high_value, c[G - 1]);
    }
  }
  r.survival_limits = r.survival_low_gap < kLimitTolerance && r.survival_high_value < kLimitTolerance;
  return r;
}

Summary summarize(const gibbs::PosteriorDraws& draws, const SummaryOptions& options) {
  if (draws.count == 0) throw InputError("hte", "no posterior draws to summarize");
  Summary s;
  const IteDraws ite = ite_draws(draws, Scale::kRatio);
  s.ite = summarize_ite(ite, options.coverage);
  s.dte = differential_effect(ite);
  s.benefit = proportion_benefiting(ite, options.epsilons, options.coverage);

  double lambda = options.bandwidth.value_or(default_bandwidth(ite));
  s.density_available = lambda > 0.0;
  const double margin = s.density_available ? 3.0 * lambda : 0.5;
  std::vector<double> grid = default_effect_grid(ite, options.effect_points, margin);
  if (s.density_available) {
    s.distribution = effect_distribution(ite, std::move(grid), lambda, options.coverage);
  } else {
    // Effects identical across patients in every draw: no spread to smooth.
    spdlog::warn("summarize: effect spread is zero, density estimate skipped");
    s.distribution = effect_cdf(ite, std::move(grid), options.coverage);
  }

  const Span m = fitted_range(draws);
  const double sigma = *std::max_element(draws.sigma.begin(), draws.sigma.end());
  const std::vector<double> times = geometric(m.lo - 2.0 * sigma, m.hi + 2.0 * sigma, options.time_points);
  for (int arm = 0; arm < 2; ++arm) s.survival[arm] = average_survival_curve(draws, arm, times, options.coverage);

  s.identities = check_identities(s.dte, s.benefit, draws);
  if (!s.identities.all()) throw NumericError("hte", "posterior summary identities failed");

  const std::vector<int> alloc_mc = allocate(ite, AllocationRule::kMisclassification);
  const std::vector<int> alloc_w = allocate(ite, AllocationRule::kWeighted);
  std::vector<double> cate = draw_means(ite);
  const stats::Interval cate_iv = stats::equal_tailed(cate, options.coverage);

  nlohmann::json j;
  j["n"] = draws.n;
  j["draws"] = draws.count;
  j["coverage"] = options.coverage;
  j["cate"] = {{"mean", stats::shifted_mean(cate)}, {"interval", interval_json(cate_iv)}};

  nlohmann::json classes = nlohmann::json::array();
  for (Evidence e : s.dte.evidence) classes.push_back(evidence_name(e));
  j["differential_effect"] = {{"pct_strong", s.dte.pct_strong}, {"pct_mild", s.dte.pct_mild},
                              {"D", s.dte.D}, {"D_star", s.dte.D_star}, {"evidence", classes}};

  nlohmann::json eps = nlohmann::json::array();
  for (const QEpsilon& q : s.benefit.Q_eps)
    eps.push_back({{"epsilon", q.epsilon}, {"mean", q.mean}, {"interval", interval_json(q.interval)}});
  nlohmann::json bands = nlohmann::json::array();
  for (std::size_t b = 0; b < kBenefitBands; ++b)
    bands.push_back({{"band", kBenefitBandLabels[b]}, {"pct", s.benefit.band_pct[b]}});
  j["benefit"] = {{"Q_mean", s.benefit.Q_mean}, {"Q_interval", interval_json(s.benefit.Q_interval)},
                  {"p_hat_mean", s.benefit.p_hat_mean}, {"Q_epsilon", eps}, {"p_hat", s.benefit.p_hat},
                  {"bands", bands}};

  std::vector<double> ratio_mean(draws.n);
  for (std::size_t i = 0; i < draws.n; ++i) {
    double acc = 0.0;
    for (std::size_t d = 0; d < ite.count; ++d) acc += ite.ratio[d * ite.n + i];
    ratio_mean[i] = acc / static_cast<double>(ite.count);
  }
  j["ite"] = {{"mean", s.ite.mean}, {"lower", s.ite.lower}, {"upper", s.ite.upper}, {"ratio_mean", ratio_mean}};
  j["allocation"] = {{"misclassification", alloc_mc}, {"weighted", alloc_w}};
  j["effect_distribution"] = {{"grid_points", s.distribution.grid.size()},
                              {"bandwidth", s.density_available ? nlohmann::json(lambda) : nlohmann::json(nullptr)}};
  j["identities"] = {{"q_mean_equals_p_hat_mean", s.identities.q_mean_matches},
                     {"d_star_identity", s.identities.d_star_matches},
                     {"survival_monotone", s.identities.survival_monotone},
                     {"survival_limits", s.identities.survival_limits}};
  s.json = std::move(j);
  return s;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("hte", "cannot write " + path.string());
  return os;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

}  // namespace

void write_band_csv(const std::filesystem::path& path, const char* x_name, const Band& b) {
  std::ofstream os = open_out(path);
  os << x_name << ",mean,lower,upper\n";
  for (std::size_t g = 0; g < b.x.size(); ++g)
    os << num(b.x[g]) << ',' << num(b.mean[g]) << ',' << num(b.lower[g]) << ',' << num(b.upper[g]) << '\n';
}

void write_summary(const std::filesystem::path& dir, const Summary& s) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  {
    std::ofstream os = open_out(dir / "summary.json");
    os << s.json.dump(2) << '\n';
  }
  {
    std::ofstream os = open_out(dir / "ite.csv");
    os << "row,mean,lower,upper,D,D_star,evidence,p_hat\n";
    for (std::size_t i = 0; i < s.ite.mean.size(); ++i)
      os << i << ',' << num(s.ite.mean[i]) << ',' << num(s.ite.lower[i]) << ',' << num(s.ite.upper[i]) << ','
         << num(s.dte.D[i]) << ',' << num(s.dte.D_star[i]) << ',' << evidence_name(s.dte.evidence[i]) << ','
         << num(s.benefit.p_hat[i]) << '\n';
  }
  {
    std::ofstream os = open_out(dir / "effect_cdf.csv");
    os << "t,H,lower,upper\n";
    const EffectDistribution& e = s.distribution;
    for (std::size_t g = 0; g < e.grid.size(); ++g)
      os << num(e.grid[g]) << ',' << num(e.H[g]) << ',' << num(e.H_lower[g]) << ',' << num(e.H_upper[g]) << '\n';
  }
  if (s.density_available) {
    std::ofstream os = open_out(dir / "effect_density.csv");
    os << "t,h\n";
    for (std::size_t g = 0; g < s.distribution.grid.size(); ++g)
      os << num(s.distribution.grid[g]) << ',' << num(s.distribution.h[g]) << '\n';
  }
  {
    std::ofstream os = open_out(dir / "survival.csv");
    os << "arm,time,mean,lower,upper\n";
    for (int arm = 0; arm < 2; ++arm) {
      const Band& b = s.survival[arm];
      for (std::size_t g = 0; g < b.x.size(); ++g)
        os << arm << ',' << num(b.x[g]) << ',' << num(b.mean[g]) << ',' << num(b.lower[g]) << ',' << num(b.upper[g])
           << '\n';
    }
  }
}

}  // namespace npaft::hte
