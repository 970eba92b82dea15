#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "npaft/bart/compact.hpp"
#include "npaft/data/dataset.hpp"
#include "npaft/error.hpp"
#include "npaft/gibbs/engine.hpp"
#include "npaft/hte/hte.hpp"
#include "npaft/hte/report.hpp"
#include "npaft/rng.hpp"
#include "npaft/stats.hpp"

using namespace npaft;
using namespace npaft::hte;

namespace {

IteDraws random_ite(std::size_t S, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> theta(S * n);
  std::vector<double> shift(n);
  for (auto& s : shift) s = rng.normal(0.0, 0.6);
  for (std::size_t d = 0; d < S; ++d)
    for (std::size_t i = 0; i < n; ++i) theta[d * n + i] = shift[i] + rng.normal(0.1, 0.4);
  return ite_from_matrix(std::move(theta), S, n);
}

// Synthetic posterior with per-draw single-component or random mixtures.
gibbs::PosteriorDraws synthetic_draws(std::size_t S, std::size_t n, std::size_t H, std::uint64_t seed) {
  Rng rng(seed);
  gibbs::PosteriorDraws d;
  d.n = n;
  d.H = H;
  d.count = S;
  for (std::size_t k = 0; k < S; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double base = 2.0 + rng.normal(0.0, 0.3);
      d.m0.push_back(base);
      d.m1.push_back(base + 0.3 + rng.normal(0.0, 0.2));
    }
    std::vector<double> w(H), t(H);
    double tot = 0;
    for (auto& v : w) tot += (v = rng.uniform(0.1, 1.0));
    double mean = 0;
    for (std::size_t h = 0; h < H; ++h) {
      w[h] /= tot;
      t[h] = rng.normal(0.0, 0.5);
      mean += w[h] * t[h];
    }
    for (std::size_t h = 0; h < H; ++h) {
      d.pi.push_back(w[h]);
      d.tau.push_back(t[h] - mean);
    }
    d.sigma.push_back(rng.uniform(0.3, 0.8));
    d.M.push_back(1.0);
  }
  return d;
}

double lognormal_survival(double t, double m, double s) {
  return 0.5 * std::erfc((std::log(t) - m) / (s * std::sqrt(2.0)));
}

}  // namespace

TEST(IteDraws, NullAndRatio) {
  gibbs::PosteriorDraws d = synthetic_draws(5, 4, 2, 1);
  d.m1 = d.m0;
  const auto ite = ite_draws(d, Scale::kRatio);
  for (double v : ite.theta) EXPECT_EQ(v, 0.0);
  for (double v : ite.ratio) EXPECT_EQ(v, 1.0);

  const auto l2 = ite_from_matrix({std::log(2.0)}, 1, 1, Scale::kRatio);
  EXPECT_NEAR(l2.ratio[0], 2.0, 1e-15);

  const auto r = random_ite(20, 7, 2);
  const auto rr = ite_from_matrix(r.theta, 20, 7, Scale::kRatio);
  for (std::size_t k = 0; k < rr.theta.size(); ++k) EXPECT_NEAR(rr.ratio[k], std::exp(rr.theta[k]), 1e-12);
  EXPECT_TRUE(r.ratio.empty());
  EXPECT_THROW(ite_from_matrix({1.0, 2.0}, 3, 1), InputError);
}

TEST(Differential, HomogeneousDrawsGiveOne) {
  std::vector<double> theta;
  for (double v : {0.3, -0.1, 0.7, 1.1 / 3.0})
    for (int i = 0; i < 5; ++i) theta.push_back(v);
  const auto dte = differential_effect(ite_from_matrix(theta, 4, 5));
  for (double D : dte.D) EXPECT_EQ(D, 1.0);
  EXPECT_EQ(dte.pct_strong, 100.0);
}

TEST(Differential, ClassBoundaries) {
  EXPECT_EQ(classify(500, 1000), Evidence::kNone);
  EXPECT_EQ(classify(975, 1000), Evidence::kStrong);
  EXPECT_EQ(classify(25, 1000), Evidence::kStrong);
  EXPECT_EQ(classify(974, 1000), Evidence::kMild);
  EXPECT_EQ(classify(26, 1000), Evidence::kMild);
  EXPECT_EQ(classify(100, 1000), Evidence::kNone);
  EXPECT_EQ(classify(99, 1000), Evidence::kMild);
  EXPECT_EQ(classify(901, 1000), Evidence::kMild);
  EXPECT_EQ(classify(900, 1000), Evidence::kNone);
}

TEST(Differential, HandCountedToy) {
  // draws (patient 0, patient 1); draw means 2, 1, 3, 2
  const std::vector<double> theta{1, 3, 2, 0, 5, 1, 4, 0};
  const auto dte = differential_effect(ite_from_matrix(theta, 4, 2));
  EXPECT_EQ(dte.above, (std::vector<std::size_t>{3, 1}));
  EXPECT_DOUBLE_EQ(dte.D[0], 0.75);
  EXPECT_DOUBLE_EQ(dte.D[1], 0.25);
  EXPECT_DOUBLE_EQ(dte.D_star[0], 0.5);
  EXPECT_DOUBLE_EQ(dte.D_star[1], 0.5);
  EXPECT_EQ(dte.pct_mild, 0.0);

  // D = 0.5 -> D* = 0; D = 0.975 -> D* = 0.95
  std::vector<double> half{0, 1, 1, 0};
  EXPECT_EQ(differential_effect(ite_from_matrix(half, 2, 2)).D_star[0], 0.0);
}

TEST(Differential, ParallelMatchesReferenceAndIdentity) {
  const auto ite = random_ite(400, 150, 3);
  const auto a = differential_effect(ite);
  const auto b = reference::differential_effect(ite);
  EXPECT_EQ(a.above, b.above);
  EXPECT_EQ(a.D, b.D);
  EXPECT_EQ(a.pct_strong, b.pct_strong);
  for (std::size_t i = 0; i < a.D.size(); ++i) {
    EXPECT_EQ(a.D_star[i], std::abs(2 * a.D[i] - 1));
    EXPECT_GE(a.D_star[i], 0.0);
    EXPECT_LE(a.D_star[i], 1.0);
  }
  EXPECT_GE(a.pct_mild, a.pct_strong);
}

TEST(EffectDistribution, HandComputedToy) {
  // patient 0 draws {0, 2, -1}, patient 1 draws {1, 1, 3}
  const std::vector<double> theta{0, 1, 2, 1, -1, 3};
  const auto ite = ite_from_matrix(theta, 3, 2);
  const auto e = effect_cdf(ite, {-2, 0, 1, 2.5, 4});
  const std::vector<double> want{0, 1.0 / 3.0, 2.0 / 3.0, 5.0 / 6.0, 1};
  for (std::size_t g = 0; g < want.size(); ++g) EXPECT_NEAR(e.H[g], want[g], 1e-15);
  const auto r = reference::effect_cdf(ite, {-2, 0, 1, 2.5, 4});
  EXPECT_EQ(r.H, e.H);
  EXPECT_EQ(r.H_lower, e.H_lower);
}

TEST(EffectDistribution, PointMass) {
  const std::vector<double> theta(12, 0.4);
  const auto ite = ite_from_matrix(theta, 4, 3);
  const std::vector<double> grid{-1.0, 0.3, 0.4, 0.5, 2.0};
  const auto e = effect_distribution(ite, grid, 0.2);
  EXPECT_EQ(e.H, (std::vector<double>{0, 0, 1, 1, 1}));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double z = (grid[g] - 0.4) / 0.2;
    EXPECT_NEAR(e.h[g], std::exp(-0.5 * z * z) / (0.2 * std::sqrt(2 * M_PI)), 1e-12);
  }
  EXPECT_THROW(effect_distribution(ite, grid, 0.0), NumericError);
  EXPECT_THROW(effect_cdf(ite, {1.0, 0.5}), InputError);
}

TEST(EffectDistribution, ProperCdfAndKernels) {
  const auto ite = random_ite(300, 80, 4);
  const double bw = default_bandwidth(ite);
  EXPECT_GT(bw, 0.0);
  const auto grid = default_effect_grid(ite, 101, 3 * bw);
  const auto e = effect_distribution(ite, grid);
  EXPECT_EQ(e.bandwidth, bw);
  EXPECT_EQ(e.H.front(), 0.0);
  EXPECT_EQ(e.H.back(), 1.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    EXPECT_GE(e.h[g], 0.0);
    EXPECT_LE(e.H_lower[g], e.H_upper[g]);
    EXPECT_GE(e.H_lower[g], 0.0);
    EXPECT_LE(e.H_upper[g], 1.0);
    if (g) EXPECT_GE(e.H[g], e.H[g - 1]);
  }
  EXPECT_EQ(effect_density(ite, grid, bw), reference::effect_density(ite, grid, bw));
  // density integrates to about one over the padded grid
  double area = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) area += 0.5 * (e.h[g] + e.h[g - 1]) * (grid[g] - grid[g - 1]);
  EXPECT_NEAR(area, 1.0, 5e-3);
}

TEST(EffectDistribution, BandwidthRule) {
  // each draw: the same 5 values, so posterior means equal the per-draw values
  std::vector<double> theta;
  const std::vector<double> row{-1.0, 0.0, 0.5, 2.0, 4.0};
  for (int d = 0; d < 3; ++d) theta.insert(theta.end(), row.begin(), row.end());
  const auto ite = ite_from_matrix(theta, 3, 5);
  const double sd = std::sqrt(stats::variance(row));
  const double iqr = stats::quantile(row, 0.75) - stats::quantile(row, 0.25);
  EXPECT_NEAR(default_bandwidth(ite), 0.9 * std::min(sd, iqr / 1.34) * std::pow(5.0, -0.2), 1e-12);
}

TEST(Benefit, AllPositiveAndThresholds) {
  std::vector<double> theta(30);
  Rng rng(5);
  for (auto& v : theta) v = rng.uniform(0.01, 0.2);
  const auto b = proportion_benefiting(ite_from_matrix(theta, 6, 5), std::vector<double>{0.0, 1.0});
  for (double q : b.Q) EXPECT_EQ(q, 1.0);
  for (double p : b.p_hat) EXPECT_EQ(p, 1.0);
  EXPECT_EQ(b.band_pct[0], 100.0);
  EXPECT_EQ(b.Q_eps[1].mean, 0.0);
  EXPECT_EQ(b.Q_eps[0].mean, 1.0);
}

TEST(Benefit, BandsAndIdentity) {
  EXPECT_EQ(benefit_band(100, 100), 0u);
  EXPECT_EQ(benefit_band(99, 100), 1u);
  EXPECT_EQ(benefit_band(96, 100), 1u);
  EXPECT_EQ(benefit_band(95, 100), 2u);
  EXPECT_EQ(benefit_band(76, 100), 2u);
  EXPECT_EQ(benefit_band(75, 100), 3u);
  EXPECT_EQ(benefit_band(26, 100), 3u);
  EXPECT_EQ(benefit_band(25, 100), 4u);
  EXPECT_EQ(benefit_band(0, 100), 4u);

  const auto ite = random_ite(333, 97, 6);
  const auto b = proportion_benefiting(ite);
  const auto r = reference::proportion_benefiting(ite);
  EXPECT_EQ(b.Q_mean, b.p_hat_mean);
  EXPECT_EQ(b.Q, r.Q);
  EXPECT_EQ(b.p_hat, r.p_hat);
  EXPECT_EQ(b.band_pct, r.band_pct);
  double tot = 0;
  for (double v : b.band_pct) tot += v;
  EXPECT_NEAR(tot, 100.0, 1e-12);
  for (double q : b.Q) {
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, 1.0);
  }
  const double direct = std::accumulate(b.p_hat.begin(), b.p_hat.end(), 0.0) / b.p_hat.size();
  EXPECT_NEAR(b.Q_mean, direct, 1e-14);
}

TEST(Allocation, Rules) {
  // patient 0: all positive; 1: symmetric; 2: mostly negative with a heavy positive tail
  const std::vector<double> theta{0.2, -1, -1, 0.1, 1, -1, 0.3, -1, -1, 0.4, 1, 5};
  const auto ite = ite_from_matrix(theta, 4, 3);
  EXPECT_EQ(allocate(ite, AllocationRule::kMisclassification), (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(allocate(ite, AllocationRule::kWeighted), (std::vector<int>{1, 0, 1}));
}

TEST(IteSummary, MeansBoundsVariance) {
  const auto ite = random_ite(200, 5, 7);
  const auto s = summarize_ite(ite);
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<double> col;
    for (std::size_t d = 0; d < 200; ++d) col.push_back(ite.at(d, i));
    EXPECT_NEAR(s.mean[i], std::accumulate(col.begin(), col.end(), 0.0) / 200, 1e-12);
    EXPECT_NEAR(s.variance[i], stats::variance(col), 1e-12);
    const auto iv = stats::equal_tailed(col, 0.95);
    EXPECT_EQ(s.lower[i], iv.lower);
    EXPECT_EQ(s.upper[i], iv.upper);
  }
}

TEST(LocationShift, Equivariance) {
  const auto ite = random_ite(250, 40, 8);
  std::vector<double> shifted = ite.theta;
  const double c = 0.75;
  for (auto& v : shifted) v += c;
  const auto moved = ite_from_matrix(shifted, 250, 40);
  EXPECT_EQ(differential_effect(moved).D, differential_effect(ite).D);
  std::vector<double> grid, grid_c;
  for (int g = 0; g < 41; ++g) {
    grid.push_back(-2.0 + 0.1 * g);
    grid_c.push_back(grid.back() + c);
  }
  EXPECT_EQ(effect_cdf(moved, grid_c).H, effect_cdf(ite, grid).H);

  // via the draws object: add c to every m1 draw
  gibbs::PosteriorDraws d = synthetic_draws(30, 12, 3, 9);
  gibbs::PosteriorDraws e = d;
  for (auto& v : e.m1) v += c;
  const auto a = ite_draws(d), b = ite_draws(e);
  for (std::size_t k = 0; k < a.theta.size(); ++k) EXPECT_NEAR(b.theta[k], a.theta[k] + c, 1e-12);
  EXPECT_EQ(differential_effect(a).D, differential_effect(b).D);
}

TEST(Survival, SingleComponentClosedForm) {
  gibbs::PosteriorDraws d = synthetic_draws(6, 3, 1, 10);
  const std::vector<double> m{1.0, 1.5, 0.2, 2.0, 3.0, -1.0};
  const std::vector<double> times{0.05, 0.5, 1.0, 3.0, 10.0, 50.0};
  const Band b = survival_curve(d, m, times);
  for (std::size_t g = 0; g < times.size(); ++g) {
    double mean = 0;
    for (std::size_t k = 0; k < 6; ++k) {
      const double s = survival_at(times[g], m[k], d.pi_row(k), d.tau_row(k), d.sigma[k]);
      EXPECT_NEAR(s, lognormal_survival(times[g], m[k], d.sigma[k]), 1e-10);
      mean += s / 6;
    }
    EXPECT_NEAR(b.mean[g], mean, 1e-12);
  }
}

TEST(Survival, MonotoneWithLimits) {
  const gibbs::PosteriorDraws d = synthetic_draws(40, 25, 4, 11);
  std::vector<double> times;
  for (int g = 0; g <= 60; ++g) times.push_back(std::exp(-40.0 + 80.0 * g / 60.0));
  for (int arm : {0, 1}) {
    std::vector<double> per;
    average_survival_curve(d, arm, times, 0.95, &per);
    for (std::size_t k = 0; k < d.count; ++k) {
      EXPECT_NEAR(per[k * times.size()], 1.0, 1e-10);
      EXPECT_NEAR(per[k * times.size() + times.size() - 1], 0.0, 1e-10);
      for (std::size_t g = 1; g < times.size(); ++g)
        EXPECT_LE(per[k * times.size() + g], per[k * times.size() + g - 1]);
    }
  }
  EXPECT_THROW(survival_curve(d, std::vector<double>(40, 0.0), {0.0, 1.0}), InputError);
}

TEST(PartialDependence, StepAndIrrelevantCovariate) {
  // tree A: arm 0 -> 0; arm 1 -> 1 if x1 <= 0 else 3.  tree B: splits on x2 only.
  bart::CompactForest f;
  f.nodes = {{0, 2, 0.5}, {-1, -1, 0.0}, {1, 4, 0.0}, {-1, -1, 1.0}, {-1, -1, 3.0},
             {2, 2, 0.0}, {-1, -1, -5.0}, {-1, -1, 7.0}};
  f.roots = {0, 5};
  bart::CompactForest g = f;
  g.nodes[3].x = 2.0;
  g.nodes[4].x = 6.0;

  const auto data = data::make_dataset({1, 2, 3}, {1, 1, 1}, {0, 1, 0},
                                       {-1.0, 0.5, 2.0, 0.7, -0.3, 1.0, 0.2, 0.9, -1.5}, 3);
  gibbs::PosteriorDraws d;
  d.n = 3;
  d.count = 2;
  d.forests = {f, g};

  const auto step = partial_dependence(d, data, 0, {-0.5, -0.1, 0.0, 0.1, 0.6});
  const std::vector<double> lo{1, 1, 1, 3, 3}, hi{2, 2, 2, 6, 6};
  for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(step.band.mean[k], 0.5 * (lo[k] + hi[k]), 1e-12);
  EXPECT_FALSE(step.extrapolated);

  const auto flat = partial_dependence(d, data, 2, {-5.0, 0.0, 5.0});
  EXPECT_TRUE(flat.extrapolated);
  // theta over rows: x1 = -1, 0.7, 0.2 -> 1, 3, 3 (draw 1) and 2, 6, 6 (draw 2)
  for (double v : flat.band.mean) EXPECT_NEAR(v, 0.5 * (7.0 / 3.0 + 14.0 / 3.0), 1e-12);
  EXPECT_EQ(flat.band.lower.front(), flat.band.lower.back());

  // a single patient reduces to its own counterfactual effect
  data::EncodedDataset one;
  one.y = {1.0};
  one.delta = {1};
  one.arm = {0};
  one.x = {-0.4, 0.0, 0.0};
  one.p = 3;
  one.column_names = {"x1", "x2", "x3"};
  gibbs::PosteriorDraws d1 = d;
  d1.n = 1;
  const auto pd = partial_dependence(d1, one, 1, {-1.0, 1.0});
  for (double v : pd.band.mean) EXPECT_NEAR(v, 0.5 * (1.0 + 2.0), 1e-12);
  const auto pd0 = partial_dependence(d1, one, 0, {1.0});
  EXPECT_NEAR(pd0.band.mean[0], 0.5 * (3.0 + 6.0), 1e-12);

  gibbs::PosteriorDraws bare = d;
  bare.forests.clear();
  EXPECT_THROW(partial_dependence(bare, data, 0, {0.0}), ConfigError);
}

TEST(VirtualTwins, MatchesNormalEquations) {
  Rng rng(12);
  const std::size_t n = 60, p = 3;
  std::vector<double> x(n * p), mean(n), var(n, 1.0);
  for (auto& v : x) v = rng.normal(0.0, 2.0);
  for (std::size_t i = 0; i < n; ++i) mean[i] = 0.3 * x[i * p] - 0.8 * x[i * p + 2] + rng.normal(0.0, 0.2);
  const auto data = data::make_dataset(std::vector<double>(n, 1.0), std::vector<int>(n, 1),
                                       std::vector<int>(n, 0), x, p);
  const auto vt = virtual_twins_rank(mean, var, data);

  Eigen::MatrixXd X(n, p + 1);
  Eigen::VectorXd y(n);
  for (std::size_t k = 0; k < p; ++k) {
    double m = 0, ss = 0;
    for (std::size_t i = 0; i < n; ++i) m += x[i * p + k] / n;
    for (std::size_t i = 0; i < n; ++i) ss += std::pow(x[i * p + k] - m, 2) / n;
    for (std::size_t i = 0; i < n; ++i) X(i, k + 1) = (x[i * p + k] - m) / std::sqrt(ss);
  }
  X.col(0).setOnes();
  for (std::size_t i = 0; i < n; ++i) y(i) = mean[i];
  const Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
  EXPECT_NEAR(vt.intercept, beta(0), 1e-10);
  for (const auto& r : vt.ranked) EXPECT_NEAR(r.coef, beta(r.column + 1), 1e-10);
  EXPECT_EQ(vt.ranked[0].column, 2u);
  EXPECT_EQ(vt.ranked[0].name, "x3");
  for (std::size_t k = 1; k < p; ++k) EXPECT_GE(std::abs(vt.ranked[k - 1].coef), std::abs(vt.ranked[k].coef));
}

TEST(VirtualTwins, ExactLinearAndConstant) {
  Rng rng(13);
  const std::size_t n = 40, p = 3;
  std::vector<double> x(n * p), mean(n), flat(n, 0.7), var(n, 1.0);
  for (auto& v : x) v = rng.normal(1.0, 1.5);
  for (std::size_t i = 0; i < n; ++i) mean[i] = 2 * x[i * p];
  const auto data = data::make_dataset(std::vector<double>(n, 1.0), std::vector<int>(n, 1),
                                       std::vector<int>(n, 0), x, p);
  const auto col = data.column(0);
  const double sd = std::sqrt(stats::variance(col, false));
  const auto vt = virtual_twins_rank(mean, var, data);
  EXPECT_EQ(vt.ranked[0].column, 0u);
  EXPECT_NEAR(vt.ranked[0].coef, 2 * sd, 1e-10);
  EXPECT_NEAR(vt.ranked[1].coef, 0.0, 1e-10);
  EXPECT_NEAR(vt.ranked[2].coef, 0.0, 1e-10);

  const auto c = virtual_twins_rank(flat, var, data);
  EXPECT_NEAR(c.intercept, 0.7, 1e-12);
  for (const auto& r : c.ranked) EXPECT_NEAR(r.coef, 0.0, 1e-10);
}

TEST(VirtualTwins, SingularDesignNamesColumns) {
  const std::size_t n = 10, p = 3;
  std::vector<double> x(n * p);
  Rng rng(14);
  for (std::size_t i = 0; i < n; ++i) {
    x[i * p] = rng.normal();
    x[i * p + 1] = rng.normal();
    x[i * p + 2] = x[i * p] + x[i * p + 1];
  }
  const auto data = data::make_dataset(std::vector<double>(n, 1.0), std::vector<int>(n, 1),
                                       std::vector<int>(n, 0), x, p);
  try {
    virtual_twins_rank(std::vector<double>(n, 0.1), std::vector<double>(n, 1.0), data);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("x3"), std::string::npos) << e.what();
  }
}

TEST(Report, SummaryIdentitiesAndFiles) {
  const gibbs::PosteriorDraws d = synthetic_draws(120, 30, 5, 15);
  const Summary s = summarize(d);
  EXPECT_TRUE(s.identities.all());
  EXPECT_TRUE(s.density_available);
  EXPECT_EQ(s.json["n"], 30);
  EXPECT_EQ(s.json["draws"], 120);
  EXPECT_EQ(s.json["benefit"]["Q_mean"], s.json["benefit"]["p_hat_mean"]);
  EXPECT_EQ(s.json["differential_effect"]["D"].size(), 30u);

  const auto dir = std::filesystem::temp_directory_path() / "npaft_test_hte";
  std::filesystem::remove_all(dir);
  write_summary(dir, s);
  for (const char* f : {"summary.json", "ite.csv", "effect_cdf.csv", "effect_density.csv", "survival.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
}

TEST(Report, HomogeneousEffectsSkipDensity) {
  gibbs::PosteriorDraws d = synthetic_draws(10, 6, 2, 16);
  for (std::size_t k = 0; k < d.m1.size(); ++k) {
    d.m0[k] = 2.0;
    d.m1[k] = 2.25;
  }
  const Summary s = summarize(d);
  EXPECT_FALSE(s.density_available);
  EXPECT_TRUE(s.json["effect_distribution"]["bandwidth"].is_null());
  EXPECT_EQ(s.dte.pct_strong, 100.0);
}
