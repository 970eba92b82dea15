#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "npaft/data/dataset.hpp"
#include "npaft/error.hpp"
#include "npaft/gibbs/draw_io.hpp"
#include "npaft/gibbs/engine.hpp"
#include "npaft/rng.hpp"

using namespace npaft;
using namespace npaft::gibbs;
namespace fs = std::filesystem;

namespace {

// log T = f(a, x) + sd * N(0,1), optional exponential censoring on log scale.
template <class F>
data::EncodedDataset synth(std::size_t n, std::uint64_t seed, F f, double sd, double censor_rate = 0.0) {
  Rng rng(seed);
  const std::size_t p = 2;
  std::vector<double> y(n), x(n * p);
  std::vector<int> d(n, 1), a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.bernoulli(0.5);
    for (std::size_t k = 0; k < p; ++k) x[i * p + k] = rng.normal();
    const double lt = f(a[i], &x[i * p]) + sd * rng.normal();
    y[i] = std::exp(lt);
    if (censor_rate > 0) {
      const double c = rng.exponential(censor_rate);
      if (c < y[i]) {
        y[i] = c;
        d[i] = 0;
      }
    }
  }
  return data::make_dataset(y, d, a, x, p);
}

FitConfig small_config(std::size_t iterations, std::size_t burn_in, std::uint64_t seed) {
  FitConfig c;
  c.iterations = iterations;
  c.burn_in = burn_in;
  c.seed = seed;
  c.calibration_draws = 1 << 16;
  c.prior.trees = 50;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "npaft_test_gibbs";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(FitConfig, ValidationAndJson) {
  FitConfig c;
  EXPECT_EQ(c.retained_per_chain(), 5000u);
  c.burn_in = c.iterations;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.thin = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.chains = 0;
  EXPECT_THROW(c.validate(), ConfigError);

  c = {};
  c.iterations = 3000;
  c.thin = 2;
  c.hyper.H = 30;
  c.prior.k = 3;
  const FitConfig back = fit_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(fit_config_from_json(nlohmann::json::parse(R"({"iterations":10,"bogus":1})")),
               ConfigError);
  EXPECT_THROW(fit_config_from_json(nlohmann::json::parse(R"({"hyper":{"H":10,"x":1}})")),
               ConfigError);
}

TEST(Fit, RetainedDrawCount) {
  const auto data = synth(30, 1, [](int, const double*) { return 1.0; }, 0.5);
  auto c = small_config(11, 10, 3);
  EXPECT_EQ(fit(data, c).count, 1u);
  c = small_config(10, 1, 3);
  c.thin = 3;
  const auto d = fit(data, c);
  EXPECT_EQ(d.count, 3u);
  EXPECT_EQ(d.m0.size(), 3u * 30);
  EXPECT_EQ(d.diagnostics[0].iteration, 3u);
  c.chains = 2;
  EXPECT_EQ(fit(data, c).count, 6u);
}

TEST(Fit, TraceOrderAndNoImputationWithoutCensoring) {
  const auto data = synth(40, 2, [](int a, const double* x) { return 1.0 + 0.5 * a + x[0]; }, 0.4);
  ASSERT_EQ(data.event_count(), data.size());
  std::vector<TraceEvent> events;
  std::vector<double> first;
  double drift = 0;
  const auto d = fit(data, small_config(20, 10, 5), [&](const TraceEvent& e) {
    events.push_back({e.chain, e.iteration, e.step, {}});
    if (first.empty()) first.assign(e.complete.begin(), e.complete.end());
    for (std::size_t i = 0; i < first.size(); ++i) drift = std::max(drift, std::abs(e.complete[i] - first[i]));
  });
  ASSERT_EQ(events.size(), 20u * 6);
  for (std::size_t k = 0; k < events.size(); ++k) {
    EXPECT_EQ(events[k].iteration, k / 6);
    EXPECT_EQ(static_cast<int>(events[k].step), static_cast<int>(k % 6) + 1);
  }
  EXPECT_EQ(drift, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i)
    EXPECT_NEAR(first[i], std::log(data.y[i]) - d.transform.mu_aft, 1e-12);
}

TEST(Fit, ImputationRespectsBounds) {
  const auto data = synth(60, 4, [](int, const double* x) { return 1.0 + x[1]; }, 0.5, 0.15);
  ASSERT_LT(data.event_count(), data.size());
  double mu = 0;
  std::vector<std::vector<double>> seen;
  const auto d = fit(data, small_config(15, 5, 6), [&](const TraceEvent& e) {
    if (e.step == Step::kImpute) seen.emplace_back(e.complete.begin(), e.complete.end());
  });
  mu = d.transform.mu_aft;
  for (const auto& z : seen) {
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double ly = std::log(data.y[i]) - mu;
      if (data.delta[i]) {
        EXPECT_EQ(z[i], ly);
      } else {
        EXPECT_GT(z[i], ly);
      }
    }
  }
}

TEST(Fit, DeterministicDrawFiles) {
  const auto data = synth(40, 7, [](int a, const double* x) { return 0.5 * a + x[0]; }, 0.5, 0.1);
  auto c = small_config(40, 20, 11);
  c.chains = 2;
  c.retain_forests = true;
  const auto a = fit(data, c);
  const auto b = fit(data, c);
  write_draws(scratch("a.csv"), a);
  write_draws(scratch("b.csv"), b);
  write_forests(scratch("a.txt"), a);
  write_forests(scratch("b.txt"), b);
  EXPECT_EQ(slurp(scratch("a.csv")), slurp(scratch("b.csv")));
  EXPECT_EQ(slurp(scratch("a.txt")), slurp(scratch("b.txt")));

  c.seed = 12;
  write_draws(scratch("c.csv"), fit(data, c));
  EXPECT_NE(slurp(scratch("a.csv")), slurp(scratch("c.csv")));
}

TEST(Fit, DrawFileRoundTripAndChecksum) {
  const auto data = synth(25, 8, [](int, const double*) { return 2.0; }, 0.3, 0.2);
  auto c = small_config(12, 4, 13);
  c.retain_forests = true;
  const auto d = fit(data, c);
  const fs::path p = scratch("rt.csv");
  write_draws(p, d);
  write_forests(scratch("rt.txt"), d);
  auto back = read_draws(p);
  EXPECT_EQ(back.count, d.count);
  EXPECT_EQ(back.m0, d.m0);
  EXPECT_EQ(back.m1, d.m1);
  EXPECT_EQ(back.pi, d.pi);
  EXPECT_EQ(back.sigma, d.sigma);
  EXPECT_EQ(back.transform.mu_aft, d.transform.mu_aft);
  EXPECT_EQ(back.config.hyper.sigma_tau_sq, d.config.hyper.sigma_tau_sq);
  read_forests(scratch("rt.txt"), back);
  ASSERT_EQ(back.forests.size(), d.count);
  const std::vector<double> x{0.3, -0.2};
  EXPECT_EQ(predict_m(back, 1, x), predict_m(d, 1, x));

  // flip one character in the body
  std::string text = slurp(p);
  const auto pos = text.find('\n', text.find('\n') + 1) + 5;
  text[pos] = text[pos] == '1' ? '2' : '1';
  const fs::path bad = scratch("bad.csv");
  std::ofstream(bad, std::ios::binary) << text;
  try {
    read_draws(bad);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
  EXPECT_THROW(read_draws(scratch("missing.csv")), InputError);
}

TEST(Fit, MixtureSnapshotsAreCentered) {
  const auto data = synth(50, 9, [](int, const double* x) { return x[0] > 0 ? 1.0 : -1.0; }, 0.3);
  const auto d = fit(data, small_config(60, 20, 14));
  for (std::size_t k = 0; k < d.count; ++k) {
    double w = 0, m = 0;
    for (std::size_t h = 0; h < d.H; ++h) {
      w += d.pi_row(k)[h];
      m += d.pi_row(k)[h] * d.tau_row(k)[h];
    }
    EXPECT_NEAR(w, 1.0, 1e-12);
    EXPECT_LT(std::abs(m), 1e-10);
    EXPECT_GT(d.sigma[k], 0);
    EXPECT_GT(d.M[k], 0);
  }
}

TEST(Fit, PureNoiseCoverage) {
  const double c = 1.5;
  const auto data = synth(50, 10, [&](int, const double*) { return c; }, 0.6);
  auto cfg = small_config(2500, 500, 15);
  cfg.prior.trees = 200;
  const auto d = fit(data, cfg);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < d.n; ++i) {
    double s = 0, ss = 0;
    for (std::size_t k = 0; k < d.count; ++k) {
      const double v = d.m_observed(k, i, data.arm[i]);
      s += v, ss += v * v;
    }
    const double mean = s / d.count;
    const double sd = std::sqrt(ss / d.count - mean * mean);
    covered += std::abs(mean - c) <= 2 * sd;
  }
  EXPECT_GE(covered, 45u);
}

TEST(Fit, AcceptanceRatesInOpenUnitInterval) {
  const auto data = synth(80, 11, [](int a, const double* x) { return 1.0 + 0.7 * a + std::sin(2 * x[0]); }, 0.4, 0.1);
  const auto d = fit(data, small_config(600, 100, 16));
  ASSERT_EQ(d.chain_moves.size(), 1u);
  const auto& m = d.chain_moves[0];
  for (std::size_t t = 0; t < bart::kMoveTypeCount; ++t) {
    EXPECT_GT(m.proposed[t], 0u) << t;
    EXPECT_GT(m.accepted[t], 0u) << t;
    EXPECT_LT(m.accepted[t], m.proposed[t]) << t;
  }
}

TEST(PredictM, TrainingRowsAndHeldOut) {
  auto truth = [](int, const double* x) { return 1.0 + (x[0] > 0 ? 1.0 : 0.0); };
  const auto data = synth(200, 12, truth, 0.3);
  auto cfg = small_config(1500, 500, 17);
  cfg.retain_forests = true;
  const auto d = fit(data, cfg);

  for (std::size_t i = 0; i < 10; ++i) {
    const auto row = data.row(i);
    const auto p0 = predict_m(d, 0, row);
    const auto p1 = predict_m(d, 1, row);
    for (std::size_t k = 0; k < d.count; ++k) {
      ASSERT_NEAR(p0[k], d.m0_row(k)[i], 1e-10);
      ASSERT_NEAR(p1[k], d.m1_row(k)[i], 1e-10);
    }
  }
  const std::vector<double> x{0.8, 0.1}, same{0.8, 0.1};
  const auto held = predict_m(d, 1, x);
  EXPECT_EQ(held, predict_m(d, 1, same));
  double s = 0, ss = 0;
  for (double v : held) s += v, ss += v * v;
  const double mean = s / held.size();
  const double sd = std::sqrt(ss / held.size() - mean * mean);
  EXPECT_LT(std::abs(mean - 2.0), 2 * sd) << mean << " sd " << sd;

  PosteriorDraws bare = d;
  bare.forests.clear();
  EXPECT_THROW(predict_m(bare, 0, x), ConfigError);
}
