#include "npaft/sim/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "npaft/error.hpp"

namespace npaft::sim {

const char* family_name(ResidualFamily f) {
  switch (f) {
    case ResidualFamily::kNormal: return "normal";
    case ResidualFamily::kGumbel: return "gumbel";
    case ResidualFamily::kStdGamma: return "std-gamma";
    case ResidualFamily::kTMixture: return "t-mixture";
  }
  return "normal";
}

ResidualFamily parse_family(const std::string& s) {
  if (s == "normal") return ResidualFamily::kNormal;
  if (s == "gumbel") return ResidualFamily::kGumbel;
  if (s == "std-gamma") return ResidualFamily::kStdGamma;
  if (s == "t-mixture") return ResidualFamily::kTMixture;
  throw ConfigError("sim", "unknown residual family '" + s + "'");
}

namespace {

double student_t(double df, Rng& rng) { return rng.normal() / std::sqrt(rng.chi_square(df) / df); }

}  // namespace

double draw_residual(ResidualFamily family, double sd, Rng& rng) {
  switch (family) {
    case ResidualFamily::kNormal:
      return sd * rng.normal();
    case ResidualFamily::kGumbel: {
      const double b = sd * std::sqrt(6.0) / std::numbers::pi;
      return -kEulerGamma * b - b * std::log(-std::log(rng.uniform_open()));
    }
    case ResidualFamily::kStdGamma:
      return sd * (rng.gamma(kStdGammaShape) - kStdGammaShape) / std::sqrt(kStdGammaShape);
    case ResidualFamily::kTMixture: {
      // Components at -mu, 0, mu with equal weight; 0.8 of the variance from
      // the locations and 0.2 from the t(3) kernels.
      const double mu = sd * std::sqrt(1.2);
      const double c = sd * std::sqrt(0.2 / kTDegrees);
      const double loc = (static_cast<double>(rng.index(3)) - 1.0) * mu;
      return loc + c * student_t(kTDegrees, rng);
    }
  }
  return 0.0;
}

std::vector<double> gen_residuals(ResidualFamily family, std::size_t n, double sd, Rng& rng) {
  std::vector<double> w(n);
  for (double& v : w) v = draw_residual(family, sd, rng);
  return w;
}

namespace {

std::vector<std::string> covariate_names(std::size_t continuous, std::size_t binary) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < continuous; ++k) names.push_back("x" + std::to_string(k + 1));
  for (std::size_t k = 0; k < binary; ++k) names.push_back("b" + std::to_string(k + 1));
  return names;
}

SimData finish(std::vector<double> log_t, std::vector<int> arm, std::vector<double> x, std::size_t p,
               std::vector<double> theta, std::vector<std::string> names) {
  SimData sim;
  const std::size_t n = log_t.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(log_t[i]);
  sim.data = data::make_dataset(std::move(y), std::vector<int>(n, 1), std::move(arm), std::move(x), p);
  sim.data.column_names = std::move(names);
  sim.log_t = std::move(log_t);
  sim.true_theta = std::move(theta);
  return sim;
}

// Shared covariate and linear-predictor draw for the linear scenarios.
void linear_design(const LinearCoefs& c, std::size_t n, Rng& rng, std::vector<int>& arm, std::vector<double>& x,
                   std::vector<double>& eta, std::vector<double>& theta) {
  const std::size_t pc = c.continuous.size(), pb = c.binary.size(), p = pc + pb;
  if (!c.interactions.empty() && c.interactions.size() != p)
    throw ConfigError("sim", "need one interaction coefficient per covariate");
  arm.resize(n);
  x.resize(n * p);
  eta.resize(n);
  theta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.data() + i * p;
    for (std::size_t k = 0; k < pc; ++k) xi[k] = rng.normal();
    for (std::size_t k = 0; k < pb; ++k) xi[pc + k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    arm[i] = rng.bernoulli(0.5) ? 1 : 0;
    double th = c.beta1;
    for (std::size_t k = 0; k < c.interactions.size(); ++k) th += c.interactions[k] * xi[k];
    double lin = c.beta0;
    for (std::size_t k = 0; k < pc; ++k) lin += c.continuous[k] * xi[k];
    for (std::size_t k = 0; k < pb; ++k) lin += c.binary[k] * xi[pc + k];
    theta[i] = th;
    eta[i] = lin + arm[i] * th;
  }
}

}  // namespace

SimData gen_linear(const LinearCoefs& coefs, ResidualFamily family, double sd, std::size_t n, Rng& rng) {
  std::vector<int> arm;
  std::vector<double> x, eta, theta;
  linear_design(coefs, n, rng, arm, x, eta, theta);
  for (std::size_t i = 0; i < n; ++i) eta[i] += draw_residual(family, sd, rng);
  const std::size_t p = coefs.continuous.size() + coefs.binary.size();
  return finish(std::move(eta), std::move(arm), std::move(x), p, std::move(theta),
                covariate_names(coefs.continuous.size(), coefs.binary.size()));
}

SimData gen_null_aft(const LinearCoefs& coefs, ResidualFamily family, double sd, std::size_t n, Rng& rng) {
  LinearCoefs c = coefs;
  c.interactions.clear();
  return gen_linear(c, family, sd, n, rng);
}

SimData gen_null_cox(const LinearCoefs& coefs, const WeibullBaseline& base, std::size_t n, Rng& rng) {
  if (!(base.shape > 0.0) || !(base.scale > 0.0)) throw ConfigError("sim", "Weibull shape and scale must be positive");
  LinearCoefs c = coefs;
  c.interactions.clear();
  std::vector<int> arm;
  std::vector<double> x, eta, theta;
  linear_design(c, n, rng, arm, x, eta, theta);
  std::vector<double> log_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = -std::log(rng.uniform_open());
    log_t[i] = std::log(base.scale) + (std::log(e) - eta[i]) / base.shape;
    theta[i] = -c.beta1 / base.shape;
  }
  const std::size_t p = c.continuous.size() + c.binary.size();
  return finish(std::move(log_t), std::move(arm), std::move(x), p, std::move(theta),
                covariate_names(c.continuous.size(), c.binary.size()));
}

double Bump::eval(const double* x) const {
  const auto k = static_cast<Eigen::Index>(vars.size());
  Eigen::VectorXd d(k);
  for (Eigen::Index j = 0; j < k; ++j) d(j) = x[vars[static_cast<std::size_t>(j)]] - mu(j);
  return std::exp(-0.5 * d.dot(V * d));
}

double FriedmanFunctions::F0(const double* x) const {
  double s = 0.0;
  for (const Bump& b : baseline) s += b.weight * b.eval(x);
  return s;
}

double FriedmanFunctions::theta(const double* x) const {
  double s = 0.0;
  for (const Bump& b : effect) s += b.weight * b.eval(x);
  return s;
}

Eigen::MatrixXd random_orthogonal(std::size_t k, Rng& rng) {
  const auto K = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd A(K, K);
  for (Eigen::Index r = 0; r < K; ++r)
    for (Eigen::Index c = 0; c < K; ++c) A(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index c = 0; c < K; ++c)
    if (R(c, c) < 0.0) Q.col(c) *= -1.0;
  return Q;
}

namespace {

Bump draw_bump(double weight, std::size_t p, Rng& rng) {
  Bump b;
  b.weight = weight;
  const double r = rng.exponential(0.5);
  const std::size_t size = std::min<std::size_t>({static_cast<std::size_t>(std::floor(r + 1.5)), 10, p});
  std::vector<int> pool(p);
  for (std::size_t k = 0; k < p; ++k) pool[k] = static_cast<int>(k);
  for (std::size_t k = 0; k < size; ++k) std::swap(pool[k], pool[k + rng.index(p - k)]);
  b.vars.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
  const auto K = static_cast<Eigen::Index>(size);
  b.mu.resize(K);
  for (Eigen::Index j = 0; j < K; ++j) b.mu(j) = rng.normal();
  b.U = random_orthogonal(size, rng);
  Eigen::VectorXd d(K);
  for (Eigen::Index j = 0; j < K; ++j) {
    const double root = rng.uniform(0.1, 2.0);
    d(j) = root * root;
  }
  b.V = b.U * d.asDiagonal() * b.U.transpose();
  return b;
}

}  // namespace

FriedmanFunctions gen_friedman_functions(const FriedmanOptions& opt, Rng& rng) {
  FriedmanFunctions f;
  f.p = opt.p;
  for (std::size_t l = 0; l < opt.baseline_terms; ++l) f.baseline.push_back(draw_bump(rng.uniform(-1.0, 1.0), opt.p, rng));
  for (std::size_t l = 0; l < opt.effect_terms; ++l) {
    const double w = rng.uniform(-0.2, 0.3);
    f.effect.push_back(draw_bump(opt.null_effect ? 0.0 : w, opt.p, rng));
  }
  return f;
}

SimData gen_friedman_scenario(const FriedmanFunctions& f, const FriedmanOptions& opt, std::size_t n, Rng& rng) {
  const std::size_t p = f.p;
  std::vector<double> x(n * p), log_t(n), theta(n);
  std::vector<int> arm(n);
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x.data() + i * p;
    for (std::size_t k = 0; k < p; ++k) xi[k] = rng.normal();
    arm[i] = rng.bernoulli(0.5) ? 1 : 0;
    theta[i] = f.theta(xi);
    log_t[i] = f.F0(xi) + arm[i] * theta[i] + draw_residual(opt.family, opt.noise_sd, rng);
  }
  return finish(std::move(log_t), std::move(arm), std::move(x), p, std::move(theta), covariate_names(p, 0));
}

const char* censoring_name(Censoring c) {
  switch (c) {
    case Censoring::kNone: return "none";
    case Censoring::kLight: return "light";
    case Censoring::kHeavy: return "heavy";
  }
  return "none";
}

Censoring parse_censoring(const std::string& s) {
  if (s == "none") return Censoring::kNone;
  if (s == "light") return Censoring::kLight;
  if (s == "heavy") return Censoring::kHeavy;
  throw ConfigError("sim", "unknown censoring level '" + s + "'");
}

double censoring_target(Censoring c, double light, double heavy) {
  switch (c) {
    case Censoring::kNone: return 0.0;
    case Censoring::kLight: return light;
    case Censoring::kHeavy: return heavy;
  }
  return 0.0;
}

double calibrate_censoring_rate(const std::vector<double>& t, double target) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("sim", "censoring target must lie in (0, 1)");
  if (t.empty()) throw InputError("sim", "no failure times to censor");
  auto frac = [&](double rate) {
    double s = 0.0;
    for (double v : t) s += -std::expm1(-rate * v);
    return s / static_cast<double>(t.size());
  };
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= static_cast<double>(t.size());
  double lo = 0.0, hi = 1.0 / mean;
  int grow = 0;
  while (frac(hi) < target) {
    hi *= 2.0;
    if (++grow > 2000 || !std::isfinite(hi)) throw NumericError("sim", "censoring rate calibration failed to bracket the target");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (frac(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void apply_censoring(SimData& sim, double target, Rng& rng) {
  const std::size_t n = sim.log_t.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = std::exp(sim.log_t[i]);
  std::size_t censored = 0;
  if (target > 0.0) {
    const double rate = calibrate_censoring_rate(t, target);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = rng.exponential(rate);
      if (c < t[i]) {
        sim.data.y[i] = c;
        sim.data.delta[i] = 0;
        ++censored;
      } else {
        sim.data.y[i] = t[i];
        sim.data.delta[i] = 1;
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      sim.data.y[i] = t[i];
      sim.data.delta[i] = 1;
    }
  }
  sim.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
}

void apply_censoring(SimData& sim, Censoring level, Rng& rng) { apply_censoring(sim, censoring_target(level), rng); }

}  // namespace npaft::sim
