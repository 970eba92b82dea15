#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "npaft/error.hpp"
#include "npaft/rng.hpp"
#include "npaft/sim/benchmark.hpp"
#include "npaft/sim/generators.hpp"
#include "npaft/sim/metrics.hpp"

using namespace npaft;
using namespace npaft::sim;
namespace fs = std::filesystem;

namespace {

struct Moments {
  double mean, var, skew;
};

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0;
  for (double x : v) m += x;
  m /= n;
  double m2 = 0, m3 = 0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  return {m, m2, m3 / std::pow(m2, 1.5)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Residuals, FamilyMoments) {
  const std::size_t n = 1000000;
  const double sd = 0.8;
  for (auto f : {ResidualFamily::kNormal, ResidualFamily::kGumbel, ResidualFamily::kStdGamma,
                 ResidualFamily::kTMixture}) {
    Rng rng(100 + static_cast<int>(f));
    const Moments m = moments(gen_residuals(f, n, sd, rng));
    EXPECT_LT(std::abs(m.mean), 3 * sd / std::sqrt(static_cast<double>(n))) << family_name(f);
    // t(3) kernels have no fourth moment, so the sample variance is rough
    const double tol = f == ResidualFamily::kTMixture ? 0.04 : 0.02;
    EXPECT_NEAR(m.var / (sd * sd), 1.0, tol) << family_name(f);
    if (f == ResidualFamily::kGumbel) {
      const double want = 12 * std::sqrt(6.0) * 1.2020569031595942 / std::pow(std::numbers::pi, 3);
      EXPECT_NEAR(m.skew / want, 1.0, 0.05);
    }
    if (f == ResidualFamily::kStdGamma) EXPECT_NEAR(m.skew, 2 / std::sqrt(kStdGammaShape), 0.05);
  }
  EXPECT_EQ(parse_family("t-mixture"), ResidualFamily::kTMixture);
  EXPECT_THROW(parse_family("cauchy"), ConfigError);
}

TEST(Friedman, OrthogonalAndBumps) {
  Rng rng(3);
  for (std::size_t k : {1u, 2u, 5u, 10u}) {
    const Eigen::MatrixXd U = random_orthogonal(k, rng);
    EXPECT_LT((U.transpose() * U - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff(), 1e-10);
  }
  FriedmanOptions opt;
  const FriedmanFunctions f = gen_friedman_functions(opt, rng);
  ASSERT_EQ(f.baseline.size(), 10u);
  ASSERT_EQ(f.effect.size(), 5u);
  for (const auto* set : {&f.baseline, &f.effect}) {
    for (const Bump& b : *set) {
      ASSERT_GE(b.vars.size(), 1u);
      ASSERT_LE(b.vars.size(), 10u);
      std::vector<double> x(opt.p, 0.0);
      for (std::size_t j = 0; j < b.vars.size(); ++j) x[b.vars[j]] = b.mu(j);
      EXPECT_NEAR(b.eval(x.data()), 1.0, 1e-14);
      x[b.vars[0]] += 1.0;
      EXPECT_LT(b.eval(x.data()), 1.0);
      // V positive definite with eigenvalues in [0.01, 4]
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.V);
      EXPECT_GE(es.eigenvalues().minCoeff(), 0.01 - 1e-12);
      EXPECT_LE(es.eigenvalues().maxCoeff(), 4.0 + 1e-12);
    }
  }
  for (const Bump& b : f.baseline) {
    EXPECT_GE(b.weight, -1.0);
    EXPECT_LT(b.weight, 1.0);
  }
  for (const Bump& b : f.effect) {
    EXPECT_GE(b.weight, -0.2);
    EXPECT_LT(b.weight, 0.3);
  }
}

TEST(Friedman, NullEffectAndReproducible) {
  FriedmanOptions opt;
  opt.null_effect = true;
  Rng a(9);
  const auto f0 = gen_friedman_functions(opt, a);
  const SimData s0 = gen_friedman_scenario(f0, opt, 300, a);
  for (double t : s0.true_theta) EXPECT_EQ(t, 0.0);

  opt.null_effect = false;
  Rng b(10), c(10);
  const auto fb = gen_friedman_functions(opt, b);
  const auto fc = gen_friedman_functions(opt, c);
  const SimData sb = gen_friedman_scenario(fb, opt, 200, b);
  const SimData sc = gen_friedman_scenario(fc, opt, 200, c);
  EXPECT_EQ(sb.true_theta, sc.true_theta);
  EXPECT_EQ(sb.log_t, sc.log_t);
  EXPECT_EQ(sb.data.x, sc.data.x);
  EXPECT_EQ(sb.data.p, 20u);
  // theta matches the function at each row
  for (std::size_t i = 0; i < 20; ++i) EXPECT_DOUBLE_EQ(sb.true_theta[i], fb.theta(sb.data.row(i).data()));
}

TEST(Generators, NullAftRecoversCoefficients) {
  LinearCoefs c;
  c.beta0 = 0.0;
  c.beta1 = 0.0;
  c.continuous.assign(5, 0.0);
  c.binary.assign(3, 0.0);
  Rng rng(21);
  const SimData z = gen_null_aft(c, ResidualFamily::kNormal, 0.7, 200000, rng);
  const Moments m = moments(z.log_t);
  EXPECT_NEAR(m.mean, 0.0, 3 * 0.7 / std::sqrt(200000.0));
  EXPECT_NEAR(m.var, 0.49, 0.49 * 0.02);

  LinearCoefs d;
  d.interactions.assign(8, 0.5);  // ignored by the null generator
  Rng r2(22);
  const std::size_t n = 20000;
  const SimData s = gen_null_aft(d, ResidualFamily::kNormal, 0.5, n, r2);
  for (double t : s.true_theta) EXPECT_EQ(t, d.beta1);
  const std::size_t p = s.data.p;
  Eigen::MatrixXd X(n, p + 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = s.data.arm[i];
    for (std::size_t k = 0; k < p; ++k) X(i, 2 + k) = s.data.row(i)[k];
    y(i) = s.log_t[i];
  }
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::VectorXd b = XtX.ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd res = y - X * b;
  const double s2 = res.squaredNorm() / static_cast<double>(n - p - 2);
  const Eigen::MatrixXd cov = s2 * XtX.inverse();
  std::vector<double> want{d.beta0, d.beta1};
  want.insert(want.end(), d.continuous.begin(), d.continuous.end());
  want.insert(want.end(), d.binary.begin(), d.binary.end());
  for (std::size_t k = 0; k < want.size(); ++k)
    EXPECT_LT(std::abs(b(k) - want[k]), 3 * std::sqrt(cov(k, k))) << k;
}

TEST(Generators, CoxNullWeibull) {
  LinearCoefs zero;
  zero.beta0 = 0;
  zero.beta1 = 0;
  zero.continuous.assign(5, 0.0);
  zero.binary.assign(3, 0.0);
  WeibullBaseline w{1.0, 3.0};
  Rng rng(31);
  const SimData e = gen_null_cox(zero, w, 1000000, rng);
  std::vector<double> t(e.log_t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::exp(e.log_t[i]);
  EXPECT_NEAR(moments(t).mean / 3.0, 1.0, 0.01);

  // KM at the true median
  const std::size_t n = 100000;
  std::vector<double> tt(t.begin(), t.begin() + n);
  std::vector<int> ev(n, 1);
  const KaplanMeier km(tt, ev);
  EXPECT_NEAR(km.at(3.0 * std::log(2.0)), 0.5, 0.01);

  // doubling the hazard halves the median
  LinearCoefs twice = zero;
  twice.beta0 = std::log(2.0);
  Rng r1(32), r2(32);
  const SimData a = gen_null_cox(zero, w, 50000, r1);
  const SimData b = gen_null_cox(twice, w, 50000, r2);
  EXPECT_NEAR(median(b.log_t) - median(a.log_t), -std::log(2.0), 1e-12);

  LinearCoefs c;
  WeibullBaseline base;
  Rng r3(33);
  const SimData s = gen_null_cox(c, base, 10, r3);
  for (double th : s.true_theta) EXPECT_DOUBLE_EQ(th, -c.beta1 / base.shape);
  EXPECT_THROW(gen_null_cox(c, WeibullBaseline{0.0, 1.0}, 10, r3), ConfigError);
}

TEST(Censoring, RatesAndBounds) {
  Rng rng(41);
  LinearCoefs c;
  SimData s = gen_null_aft(c, ResidualFamily::kGumbel, 0.8, 10000, rng);
  apply_censoring(s, Censoring::kNone, rng);
  EXPECT_EQ(s.data.event_count(), s.data.size());
  EXPECT_EQ(s.censored_fraction, 0.0);

  for (auto level : {Censoring::kLight, Censoring::kHeavy}) {
    for (int gen = 0; gen < 3; ++gen) {
      Rng r(50 + gen);
      SimData d = gen == 0   ? gen_null_aft(c, ResidualFamily::kNormal, 0.8, 10000, r)
                  : gen == 1 ? gen_null_cox(c, WeibullBaseline{}, 10000, r)
                             : gen_friedman_scenario(gen_friedman_functions({}, r), {}, 10000, r);
      apply_censoring(d, level, r);
      const double target = censoring_target(level);
      EXPECT_NEAR(d.censored_fraction, target, 0.05 * target) << censoring_name(level) << " " << gen;
      std::size_t cens = 0;
      for (std::size_t i = 0; i < d.data.size(); ++i) {
        const double t = std::exp(d.log_t[i]);
        EXPECT_LE(d.data.y[i], t);
        if (d.data.delta[i]) {
          EXPECT_EQ(d.data.y[i], t);
        } else {
          ++cens;
        }
      }
      EXPECT_EQ(static_cast<double>(cens) / d.data.size(), d.censored_fraction);
    }
  }
  // calibrated rate hits the expected fraction exactly on the sample
  std::vector<double> t{0.5, 1.0, 2.0, 4.0};
  const double rate = calibrate_censoring_rate(t, 0.3);
  double frac = 0;
  for (double v : t) frac += 1 - std::exp(-rate * v);
  EXPECT_NEAR(frac / 4, 0.3, 1e-12);
  EXPECT_THROW(calibrate_censoring_rate(t, 1.0), ConfigError);
  EXPECT_DOUBLE_EQ(censoring_target(Censoring::kLight), 0.20);
  EXPECT_DOUBLE_EQ(censoring_target(Censoring::kHeavy), 0.45);
}

TEST(Metrics, ScoreReplicationToy) {
  const std::vector<double> truth{0.5, -0.2, 0.1, 0.0};
  const std::vector<double> est{0.4, 0.0, 0.3, -0.1};
  const std::vector<double> lo{0.3, -0.1, 0.2, -0.2}, hi{0.6, 0.1, 0.4, 0.0};
  const std::vector<int> alloc{1, 1, 0, 0};
  const MetricRow r = score_replication(truth, est, lo, hi, alloc, 12.5, 30.0);
  EXPECT_NEAR(r.rmse, std::sqrt(0.025), 1e-12);
  EXPECT_DOUBLE_EQ(r.coverage, 0.5);
  EXPECT_DOUBLE_EQ(r.mcprop, 0.5);
  EXPECT_EQ(r.pct_strong, 12.5);
  EXPECT_EQ(r.pct_mild, 30.0);

  const std::vector<int> right{1, 0, 1, 0}, wrong{0, 1, 0, 1};
  EXPECT_EQ(score_replication(truth, est, lo, hi, right).mcprop, 0.0);
  EXPECT_EQ(score_replication(truth, est, lo, hi, wrong).mcprop, 1.0);
  EXPECT_THROW(score_replication(truth, est, lo, hi, std::vector<int>{1}), InputError);
}

TEST(Metrics, KaplanMeierByHand) {
  const std::vector<double> t{3, 1, 4, 2, 3};
  const std::vector<int> e{1, 1, 1, 0, 0};
  const KaplanMeier km(t, e);
  // risk sets: t=1 five, t=3 three (one death, one censored tie)
  EXPECT_DOUBLE_EQ(km.at(0.5), 1.0);
  EXPECT_DOUBLE_EQ(km.at(1.0), 0.8);
  EXPECT_DOUBLE_EQ(km.before(1.0), 1.0);
  EXPECT_DOUBLE_EQ(km.at(2.5), 0.8);
  EXPECT_DOUBLE_EQ(km.at(3.0), 0.8 * 2 / 3);
  EXPECT_DOUBLE_EQ(km.before(3.0), 0.8);
  EXPECT_DOUBLE_EQ(km.at(4.0), 0.0);
  EXPECT_EQ(km.times().size(), 3u);
}

TEST(Metrics, CensoringWeights) {
  const auto full = data::make_dataset({1, 2, 3, 4}, {1, 1, 1, 1}, {0, 1, 0, 1}, {0, 0, 0, 0}, 1);
  for (double w : censoring_weights(full)) EXPECT_EQ(w, 1.0);
  const auto d = data::make_dataset({1, 2, 3, 4}, {1, 0, 1, 1}, {0, 1, 0, 1}, {0, 0, 0, 0}, 1);
  const auto w = censoring_weights(d);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], 1.0);
  EXPECT_DOUBLE_EQ(w[2], 2.0 / 3);
  EXPECT_DOUBLE_EQ(w[3], 2.0 / 3);
}

TEST(CrossValidation, FoldsAndScores) {
  const auto folds = assign_folds(11, 3, 5);
  std::vector<int> size(3, 0);
  for (auto f : folds) ++size[f];
  EXPECT_EQ(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()), 1);
  EXPECT_EQ(folds, assign_folds(11, 3, 5));
  EXPECT_THROW(assign_folds(10, 1, 5), ConfigError);
  EXPECT_THROW(assign_folds(2, 3, 5), InputError);

  const std::vector<double> y{1, 2, 3, 4, 5, 6};
  const std::vector<int> delta{1, 0, 1, 1, 1, 1};
  const auto d = data::make_dataset(y, delta, {0, 1, 0, 1, 0, 1}, {0, 1, 2, 3, 4, 5}, 1);
  FitPredict perfect = [](const data::EncodedDataset&, const data::EncodedDataset& te) {
    std::vector<double> out(te.size());
    for (std::size_t i = 0; i < te.size(); ++i) out[i] = std::log(te.y[i]);
    return out;
  };
  const CvResult zero = cross_validation_score(d, 2, 7, perfect);
  ASSERT_EQ(zero.fold_scores.size(), 2u);
  EXPECT_EQ(zero.mean, 0.0);

  // prediction off by y/10 on the log scale
  FitPredict off = [](const data::EncodedDataset&, const data::EncodedDataset& te) {
    std::vector<double> out(te.size());
    for (std::size_t i = 0; i < te.size(); ++i) out[i] = std::log(te.y[i]) + 0.1 * te.y[i];
    return out;
  };
  // G(t-) from the single censoring at y=2 with 5 at risk
  const std::vector<double> G{1, 1, 0.8, 0.8, 0.8, 0.8};
  const auto fold = assign_folds(6, 2, 7);
  std::vector<double> want(2, 0.0);
  std::vector<int> count(2, 0);
  for (std::size_t i = 0; i < 6; ++i) {
    ++count[fold[i]];
    if (delta[i]) want[fold[i]] += 0.1 * y[i] / G[i];
  }
  const CvResult r = cross_validation_score(d, 2, 7, off);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(r.fold_scores[k], want[k] / count[k], 1e-12);
  EXPECT_NEAR(r.mean, 0.5 * (r.fold_scores[0] + r.fold_scores[1]), 1e-15);

  // a held-out fold with no events
  const auto none = data::make_dataset({1, 2, 3, 4}, {0, 0, 0, 1}, {0, 1, 0, 1}, {0, 1, 2, 3}, 1);
  EXPECT_THROW(cross_validation_score(none, 4, 1, perfect), InputError);
}

TEST(Benchmark, ConfigJson) {
  const auto j = nlohmann::json::parse(R"({
    "reps": 2,
    "fit": {"iterations": 60, "burn_in": 20},
    "scenarios": [
      {"kind": "aft-linear-null", "n": 30, "family": "gumbel", "censoring": "light", "seed": 4},
      {"name": "cox", "kind": "cox-null", "weibull": {"shape": 2.0, "scale": 1.0}},
      {"kind": "friedman-hte", "friedman": {"p": 5, "null_effect": true}}
    ]})");
  const BenchmarkConfig c = benchmark_config_from_json(j);
  EXPECT_EQ(c.reps, 2u);
  ASSERT_EQ(c.scenarios.size(), 3u);
  EXPECT_EQ(c.scenarios[0].name, "scenario1");
  EXPECT_EQ(c.scenarios[1].name, "cox");
  EXPECT_EQ(c.scenarios[0].family, ResidualFamily::kGumbel);
  EXPECT_EQ(c.scenarios[1].weibull.shape, 2.0);
  EXPECT_TRUE(c.scenarios[2].friedman.null_effect);
  EXPECT_EQ(to_json(benchmark_config_from_json(to_json(c))), to_json(c));

  auto bad = j;
  bad["scenarios"][0]["colour"] = 1;
  EXPECT_THROW(benchmark_config_from_json(bad), ConfigError);
  bad = j;
  bad["extra"] = true;
  EXPECT_THROW(benchmark_config_from_json(bad), ConfigError);
  bad = j;
  bad["scenarios"] = nlohmann::json::array();
  EXPECT_THROW(benchmark_config_from_json(bad), ConfigError);
  bad = j;
  bad["scenarios"][0]["kind"] = "weird";
  EXPECT_THROW(benchmark_config_from_json(bad), ConfigError);
}

TEST(Benchmark, SmokeRunIsDeterministic) {
  BenchmarkConfig c;
  c.reps = 2;
  c.fit.iterations = 50;
  c.fit.burn_in = 20;
  c.fit.calibration_draws = 1 << 16;
  c.fit.prior.trees = 20;
  Scenario a;
  a.n = 40;
  a.censoring = Censoring::kLight;
  Scenario f;
  f.kind = ScenarioKind::kFriedmanHte;
  f.n = 40;
  f.friedman.p = 4;
  c.scenarios = {a, f};
  c.baseline = true;

  const BenchmarkResult r = run_benchmark(c);
  ASSERT_EQ(r.rows.size(), 4u);
  ASSERT_EQ(r.aggregates.size(), 2u);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    EXPECT_EQ(r.rows[k].scenario, k / 2);
    EXPECT_EQ(r.rows[k].rep, k % 2);
    const MetricRow& m = r.rows[k].bart;
    EXPECT_GE(m.rmse, 0.0);
    EXPECT_GE(m.coverage, 0.0);
    EXPECT_LE(m.coverage, 1.0);
    EXPECT_GE(m.pct_strong, 0.0);
    EXPECT_LE(m.pct_strong + m.pct_mild, 100.0 + 1e-9);
    ASSERT_TRUE(r.rows[k].baseline.has_value());
  }
  EXPECT_EQ(r.aggregates[0].reps, 2u);
  EXPECT_NEAR(r.aggregates[0].mean.rmse, 0.5 * (r.rows[0].bart.rmse + r.rows[1].bart.rmse), 1e-12);

  // rows are drawn in sequence from the same functions, so a larger n
  // extends the smaller replication
  const SimData s1 = generate_replication(f, 1);
  Scenario big = f;
  big.n = 80;
  const SimData s2 = generate_replication(big, 1);
  ASSERT_EQ(s2.data.size(), 80u);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_EQ(s1.true_theta[i], s2.true_theta[i]);

  const fs::path dir = fs::temp_directory_path() / "npaft_test_sim";
  fs::create_directories(dir);
  write_benchmark_csv(dir / "a.csv", c, r);
  write_benchmark_csv(dir / "b.csv", c, run_benchmark(c));
  EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
  EXPECT_FALSE(format_table(c, r).empty());
}
