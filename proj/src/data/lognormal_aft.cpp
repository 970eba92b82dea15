#include "npaft/data/lognormal_aft.hpp"

#include <cmath>
#include <spdlog/spdlog.h>

#include "npaft/error.hpp"
#include "npaft/normal_math.hpp"
#include "npaft/stats.hpp"

namespace npaft::data {

namespace {
constexpr const char* kModule = "data-model";

struct Derivatives {
  double loglik = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// Parameters: (coef, eta = log sigma).
Derivatives evaluate(const Eigen::MatrixXd& X, std::span<const double> logt,
                     std::span<const int> delta, const Eigen::VectorXd& theta) {
  const Eigen::Index p = X.cols();
  const Eigen::VectorXd beta = theta.head(p);
  const double eta = theta(p);
  const double sigma = std::exp(eta);
  Derivatives d;
  d.grad = Eigen::VectorXd::Zero(p + 1);
  d.hess = Eigen::MatrixXd::Zero(p + 1, p + 1);
  const Eigen::VectorXd fitted = X * beta;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double z = (logt[i] - fitted(i)) / sigma;
    const auto xi = X.row(i).transpose();
    if (delta[i] == 1) {
      d.loglik += -eta + normal::log_pdf(z);
      d.grad.head(p) += (z / sigma) * xi;
      d.grad(p) += z * z - 1.0;
      d.hess.topLeftCorner(p, p) -= (xi * xi.transpose()) / (sigma * sigma);
      d.hess.col(p).head(p) -= (2.0 * z / sigma) * xi;
      d.hess(p, p) -= 2.0 * z * z;
    } else {
      const double lam = normal::inverse_mills(z);
      const double dlam = lam * (lam - z);
      d.loglik += normal::log_sf(z);
      d.grad.head(p) += (lam / sigma) * xi;
      d.grad(p) += lam * z;
      d.hess.topLeftCorner(p, p) -= (dlam / (sigma * sigma)) * (xi * xi.transpose());
      d.hess.col(p).head(p) -= ((dlam * z + lam) / sigma) * xi;
      d.hess(p, p) -= z * (dlam * z + lam);
    }
  }
  d.hess.row(p).head(p) = d.hess.col(p).head(p).transpose();
  return d;
}

Eigen::VectorXd initial_parameters(const Eigen::MatrixXd& X, std::span<const double> logt,
                                   std::span<const int> delta) {
  // Least squares on uncensored rows, falling back on all rows when the
  // uncensored subset cannot identify the coefficients.
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (delta[i] == 1) rows.push_back(i);
  }
  if (static_cast<Eigen::Index>(rows.size()) <= X.cols()) {
    rows.clear();
    for (Eigen::Index i = 0; i < X.rows(); ++i) rows.push_back(i);
  }
  Eigen::MatrixXd A(rows.size(), X.cols());
  Eigen::VectorXd b(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A.row(r) = X.row(rows[r]);
    b(r) = logt[rows[r]];
  }
  Eigen::VectorXd beta = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd resid = b - A * beta;
  double sd = std::sqrt(resid.squaredNorm() / static_cast<double>(rows.size()));
  if (!(sd > kMinAftSigma)) {
    std::vector<double> all(logt.begin(), logt.end());
    sd = std::sqrt(stats::variance(all, false));
    if (!(sd > kMinAftSigma)) sd = 1.0;
  }
  Eigen::VectorXd theta(X.cols() + 1);
  theta.head(X.cols()) = beta;
  theta(X.cols()) = std::log(sd);
  return theta;
}
}  // namespace

double lognormal_aft_log_likelihood(const Eigen::MatrixXd& design,
                                    std::span<const double> log_time,
                                    std::span<const int> delta, const Eigen::VectorXd& coef,
                                    double sigma) {
  Eigen::VectorXd theta(coef.size() + 1);
  theta.head(coef.size()) = coef;
  theta(coef.size()) = std::log(sigma);
  return evaluate(design, log_time, delta, theta).loglik;
}

LognormalAftFit fit_lognormal_aft(const Eigen::MatrixXd& X, std::span<const double> logt,
                                  std::span<const int> delta, const AftFitOptions& options) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (static_cast<Eigen::Index>(logt.size()) != n || static_cast<Eigen::Index>(delta.size()) != n) {
    throw InputError(kModule, "AFT fit: design and response lengths differ");
  }
  Eigen::Index events = 0;
  for (int d : delta) events += d == 1;
  if (events == 0) {
    throw NumericError(kModule, "likelihood unbounded: all observations are censored");
  }

  LognormalAftFit out;
  Eigen::VectorXd theta = initial_parameters(X, logt, delta);

  // Zero-variance uncensored input: the MLE sits at sigma = 0.
  if (events == n) {
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(
        Eigen::Map<const Eigen::VectorXd>(logt.data(), n));
    const double rss = (Eigen::Map<const Eigen::VectorXd>(logt.data(), n) - X * beta).squaredNorm();
    if (std::sqrt(rss / static_cast<double>(n)) <= kMinAftSigma) {
      spdlog::warn("lognormal AFT: zero residual variance, sigma clamped at {}", kMinAftSigma);
      out.coef = beta;
      out.sigma = kMinAftSigma;
      out.sigma_clamped = true;
      out.covariance = Eigen::MatrixXd::Zero(p + 1, p + 1);
      out.log_likelihood = lognormal_aft_log_likelihood(X, logt, delta, beta, kMinAftSigma);
      return out;
    }
  }

  const double scale = 1.0 / static_cast<double>(n);
  Derivatives d = evaluate(X, logt, delta, theta);
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const double gnorm = scale * d.grad.norm();
    if (gnorm < options.gradient_tolerance) break;

    // Damped Newton: fall back toward gradient ascent when -H is not
    // positive definite.
    Eigen::MatrixXd neg_h = -d.hess;
    double damping = 0.0;
    Eigen::VectorXd step;
    for (int attempt = 0; attempt < 60; ++attempt) {
      Eigen::MatrixXd m = neg_h;
      m.diagonal().array() += damping;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(d.grad);
        break;
      }
      damping = damping == 0.0 ? 1e-8 * (1.0 + neg_h.diagonal().cwiseAbs().maxCoeff()) : damping * 10.0;
    }
    if (step.size() == 0) step = d.grad * scale;

    double t = 1.0;
    Derivatives trial;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd cand = theta + t * step;
      trial = evaluate(X, logt, delta, cand);
      if (std::isfinite(trial.loglik) && trial.loglik >= d.loglik - 1e-12 * std::abs(d.loglik)) {
        theta = cand;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
    d = std::move(trial);
    if (std::exp(theta(p)) < kMinAftSigma) {
      spdlog::warn("lognormal AFT: sigma below {}; clamped", kMinAftSigma);
      theta(p) = std::log(kMinAftSigma);
      out.sigma_clamped = true;
      d = evaluate(X, logt, delta, theta);
      break;
    }
  }

  out.gradient_norm = scale * d.grad.norm();
  out.iterations = iter;
  if (!out.sigma_clamped && !(out.gradient_norm < options.gradient_tolerance)) {
    throw NumericError(kModule, "lognormal AFT fit did not converge after " +
                                    std::to_string(iter) + " iterations; gradient norm " +
                                    std::to_string(out.gradient_norm));
  }
  out.coef = theta.head(p);
  out.sigma = std::exp(theta(p));
  out.log_likelihood = d.loglik;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(-d.hess);
  out.covariance = ldlt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
  return out;
}

ResponseTransform fit_intercept_lognormal_aft(const EncodedDataset& data,
                                              const AftFitOptions& options) {
  const std::size_t n = data.size();
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
  std::vector<double> logt(n);
  for (std::size_t i = 0; i < n; ++i) logt[i] = std::log(data.y[i]);
  LognormalAftFit fit = fit_lognormal_aft(X, logt, data.delta, options);
  return {fit.coef(0), fit.sigma, fit.sigma_clamped};
}

EncodedDataset transform_responses(const EncodedDataset& data, const ResponseTransform& t) {
  if (!(t.sigma_aft > 0.0) || !std::isfinite(t.mu_aft)) {
    throw InputError(kModule, "invalid response transform");
  }
  EncodedDataset out = data;
  const double factor = std::exp(-t.mu_aft);
  for (double& v : out.y) {
    v *= factor;
    if (!std::isfinite(v) || !(v > 0.0)) {
      throw NumericError(kModule, "response transform overflowed");
    }
  }
  return out;
}

namespace {
Eigen::MatrixXd parametric_design(const EncodedDataset& data, bool interactions,
                                  std::span<const int> arms) {
  const std::size_t n = data.size();
  const std::size_t p = data.p;
  const std::size_t width = 2 + p + (interactions ? p : 0);
  Eigen::MatrixXd X(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = arms[i];
    for (std::size_t k = 0; k < p; ++k) {
      X(i, 2 + k) = data.covariate(i, k);
      if (interactions) X(i, 2 + p + k) = arms[i] * data.covariate(i, k);
    }
  }
  return X;
}
}  // namespace

double ParametricAftResult::predict(int a, std::span<const double> x) const {
  const std::size_t p = x.size();
  double v = fit.coef(0) + a * fit.coef(1);
  for (std::size_t k = 0; k < p; ++k) {
    v += fit.coef(2 + k) * x[k];
    if (interactions) v += a * fit.coef(2 + p + k) * x[k];
  }
  return v;
}

ParametricAftResult fit_parametric_aft(const EncodedDataset& data, bool interactions,
                                       const AftFitOptions& options) {
  const std::size_t n = data.size();
  const std::size_t p = data.p;
  std::vector<double> logt(n);
  for (std::size_t i = 0; i < n; ++i) logt[i] = std::log(data.y[i]);
  ParametricAftResult res;
  res.interactions = interactions;
  res.fit = fit_lognormal_aft(parametric_design(data, interactions, data.arm), logt, data.delta,
                              options);

  // ITE_i = b_trt + sum_k g_k x_ik; gradient picks coefficient 1 and the
  // interaction block.
  const Eigen::Index width = res.fit.coef.size();
  Eigen::VectorXd mean_grad = Eigen::VectorXd::Zero(width);
  const Eigen::MatrixXd cov = res.fit.covariance.topLeftCorner(width, width);
  res.ite.resize(n);
  res.ite_se.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(width);
    g(1) = 1.0;
    if (interactions) {
      for (std::size_t k = 0; k < p; ++k) g(2 + p + k) = data.covariate(i, k);
    }
    res.ite[i] = g.dot(res.fit.coef);
    res.ite_se[i] = std::sqrt(std::max(0.0, g.dot(cov * g)));
    mean_grad += g / static_cast<double>(n);
  }
  res.average_ite = mean_grad.dot(res.fit.coef);
  res.average_ite_se = std::sqrt(std::max(0.0, mean_grad.dot(cov * mean_grad)));
  return res;
}

}  // namespace npaft::data
