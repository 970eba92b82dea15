#include "npaft/cli/commands.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "npaft/cdp/calibration.hpp"
#include "npaft/data/dataset.hpp"
#include "npaft/data/schema.hpp"
#include "npaft/digest.hpp"
#include "npaft/error.hpp"
#include "npaft/gibbs/draw_io.hpp"
#include "npaft/gibbs/engine.hpp"
#include "npaft/hte/hte.hpp"
#include "npaft/hte/report.hpp"
#include "npaft/sim/benchmark.hpp"
#include "npaft/sim/metrics.hpp"

namespace npaft::cli {

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cli", "input not found: " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cli", path.string() + " is not valid JSON: " + e.what());
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& out, const std::string& command, const nlohmann::json& config,
                    std::optional<std::uint64_t> seed, const std::vector<Input>& inputs, const std::string& started) {
  nlohmann::json in = nlohmann::json::array();
  for (const Input& i : inputs) in.push_back({{"path", i.path.string()}, {"sha256", i.sha256}});
  nlohmann::json m = {{"command", command},
                      {"tool_version", kToolVersion},
                      {"config", config},
                      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
                      {"inputs", in},
                      {"started", started},
                      {"finished", utc_now()}};
  std::ofstream os(out / kManifest, std::ios::binary);
  if (!os) throw InputError("cli", "cannot write manifest in " + out.string());
  os << m.dump(2) << '\n';
}

namespace {

void make_out_dir(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw InputError("cli", "cannot create output directory " + out.string() + ": " + ec.message());
}

Input digest(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("cli", "input not found: " + p.string());
  return {p, sha256_file(p)};
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

gibbs::PosteriorDraws load_draws(const fs::path& dir, bool forests) {
  const fs::path file = dir / kDrawFile;
  if (!fs::exists(file)) throw InputError("cli", "input not found: " + file.string());
  gibbs::PosteriorDraws d = gibbs::read_draws(file);
  if (forests) {
    const fs::path ff = dir / kForestFile;
    if (!fs::exists(ff))
      throw ConfigError("cli", "forest checkpoints absent in " + dir.string() + "; refit with --retain-forests");
    gibbs::read_forests(ff, d);
  }
  return d;
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = points == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(k) /
                                                          static_cast<double>(points - 1));
  return g;
}

}  // namespace

void cmd_fit(const FitArgs& a) {
  const std::string started = utc_now();
  std::vector<Input> inputs{digest(a.data), digest(a.schema)};
  nlohmann::json cj = nlohmann::json::object();
  if (a.config) {
    inputs.push_back(digest(*a.config));
    cj = read_json_file(*a.config);
  }
  const bool has_seed = a.seed.has_value() || (cj.is_object() && cj.contains("seed"));
  if (!has_seed) throw ConfigError("cli", "fit needs --seed or a seed in the config");
  gibbs::FitConfig cfg = gibbs::fit_config_from_json(cj);
  if (a.seed) cfg.seed = *a.seed;
  if (a.chains) cfg.chains = *a.chains;
  if (a.iterations) cfg.iterations = *a.iterations;
  if (a.burn_in) cfg.burn_in = *a.burn_in;
  if (a.thin) cfg.thin = *a.thin;
  if (a.retain_forests) cfg.retain_forests = true;
  cfg.validate();

  const data::CovariateSchema schema = data::CovariateSchema::load(a.schema);
  const data::EncodedDataset data = data::load_dataset(a.data, schema);
  make_out_dir(a.out);
  const gibbs::PosteriorDraws draws = gibbs::fit(data, cfg);
  gibbs::write_draws(a.out / kDrawFile, draws);
  gibbs::write_diagnostics(a.out / kDiagnosticsFile, draws);
  if (cfg.retain_forests) gibbs::write_forests(a.out / kForestFile, draws);
  write_manifest(a.out, "fit", gibbs::to_json(cfg), cfg.seed, inputs, started);
}

void cmd_summarize(const SummarizeArgs& a) {
  const std::string started = utc_now();
  const std::vector<Input> inputs{digest(a.draws / kDrawFile)};
  const gibbs::PosteriorDraws draws = load_draws(a.draws, false);
  hte::SummaryOptions opt;
  opt.bandwidth = a.bandwidth;
  opt.effect_points = a.effect_points;
  opt.time_points = a.time_points;
  if (!a.epsilons.empty()) opt.epsilons = a.epsilons;
  if (opt.effect_points < 2 || opt.time_points < 2) throw ConfigError("cli", "grids need at least 2 points");
  const hte::Summary s = hte::summarize(draws, opt);
  make_out_dir(a.out);
  hte::write_summary(a.out, s);
  nlohmann::json echo = {{"effect_points", opt.effect_points}, {"time_points", opt.time_points},
                         {"epsilons", opt.epsilons},
                         {"bandwidth", a.bandwidth ? nlohmann::json(*a.bandwidth) : nlohmann::json(nullptr)}};
  write_manifest(a.out, "summarize", echo, std::nullopt, inputs, started);
}

void cmd_survcurve(const SurvcurveArgs& a) {
  const std::string started = utc_now();
  if (a.arm != 0 && a.arm != 1) throw ConfigError("cli", "--arm must be 0 or 1");
  const bool out_of_sample = !a.row.has_value();
  const gibbs::PosteriorDraws draws = load_draws(a.draws, out_of_sample);
  std::vector<Input> inputs{digest(a.draws / kDrawFile)};
  if (out_of_sample) inputs.push_back(digest(a.draws / kForestFile));

  std::vector<double> m(draws.count);
  if (a.row) {
    if (*a.row >= draws.n) throw InputError("cli", "--row is out of range");
    for (std::size_t d = 0; d < draws.count; ++d) m[d] = draws.m_observed(d, *a.row, a.arm);
  } else {
    if (a.x.empty()) throw ConfigError("cli", "survcurve needs --row or --x");
    m = gibbs::predict_m(draws, a.arm, a.x);
  }
  std::vector<double> times = a.times;
  if (times.empty()) {
    double lo = INFINITY, hi = -INFINITY;
    for (double v : m) lo = std::min(lo, v), hi = std::max(hi, v);
    const double s = *std::max_element(draws.sigma.begin(), draws.sigma.end());
    times = geometric_grid(std::exp(lo - 3.0 * s), std::exp(hi + 3.0 * s), a.points);
  }
  const hte::Band b = hte::survival_curve(draws, m, std::move(times));
  for (std::size_t d = 0; d < draws.count; ++d) {
    double prev = 1.0;
    for (double t : b.x) {
      const double s = hte::survival_at(t, m[d], draws.pi_row(d), draws.tau_row(d), draws.sigma[d]);
      if (s > prev) throw NumericError("cli", "survival curve is not monotone");
      prev = s;
    }
  }
  make_out_dir(a.out);
  hte::write_band_csv(a.out / "survival.csv", "time", b);
  nlohmann::json echo = {{"arm", a.arm}, {"points", b.x.size()}};
  if (a.row) echo["row"] = *a.row;
  else echo["x"] = a.x;
  write_manifest(a.out, "survcurve", echo, std::nullopt, inputs, started);
}

void cmd_pdp(const PdpArgs& a) {
  const std::string started = utc_now();
  const gibbs::PosteriorDraws draws = load_draws(a.draws, true);
  const std::vector<Input> inputs{digest(a.draws / kDrawFile), digest(a.draws / kForestFile), digest(a.data),
                                  digest(a.schema)};
  const data::CovariateSchema schema = data::CovariateSchema::load(a.schema);
  const data::EncodedDataset data = data::load_dataset(a.data, schema);

  std::size_t l = data.p;
  for (std::size_t k = 0; k < data.p; ++k)
    if (data.column_names[k] == a.covariate) l = k;
  if (l == data.p) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(a.covariate.c_str(), &end, 10);
    if (end && *end == '\0' && !a.covariate.empty() && v < data.p) l = v;
  }
  if (l == data.p) throw InputError("cli", "unknown covariate '" + a.covariate + "'");

  std::vector<double> grid = a.grid;
  if (grid.empty()) {
    std::vector<double> col = data.column(l);
    std::sort(col.begin(), col.end());
    col.erase(std::unique(col.begin(), col.end()), col.end());
    if (col.size() <= a.points) {
      grid = col;
    } else {
      for (std::size_t g = 0; g < a.points; ++g)
        grid.push_back(stats::quantile_sorted(col, 0.05 + 0.9 * static_cast<double>(g) / static_cast<double>(a.points - 1)));
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
  }
  const hte::PartialDependence pd = hte::partial_dependence(draws, data, l, std::move(grid));
  if (pd.extrapolated) spdlog::warn("pdp: grid extends beyond the observed range of {}", data.column_names[l]);
  make_out_dir(a.out);
  hte::write_band_csv(a.out / "pdp.csv", "z", pd.band);
  write_manifest(a.out, "pdp", {{"covariate", data.column_names[l]}, {"extrapolated", pd.extrapolated}}, std::nullopt,
                 inputs, started);
}

void cmd_simulate(const SimulateArgs& a) {
  const std::string started = utc_now();
  const std::vector<Input> inputs{digest(a.config)};
  const nlohmann::json cj = read_json_file(a.config);
  sim::BenchmarkConfig cfg = sim::benchmark_config_from_json(cj);
  const bool has_seed = a.seed.has_value() || (cj.contains("fit") && cj.at("fit").contains("seed"));
  if (!has_seed) throw ConfigError("cli", "simulate needs --seed or fit.seed in the config");
  if (a.seed) cfg.fit.seed = *a.seed;
  if (a.reps) cfg.reps = *a.reps;
  if (cfg.reps < 1) throw ConfigError("cli", "--reps must be at least 1");
  const sim::BenchmarkResult r = sim::run_benchmark(cfg);
  make_out_dir(a.out);
  sim::write_benchmark_csv(a.out / "benchmark.csv", cfg, r);
  {
    std::ofstream os(a.out / "table.txt", std::ios::binary);
    os << sim::format_table(cfg, r);
  }
  write_manifest(a.out, "simulate", sim::to_json(cfg), cfg.fit.seed, inputs, started);
}

void cmd_crossval(const CrossvalArgs& a) {
  const std::string started = utc_now();
  std::vector<Input> inputs{digest(a.data), digest(a.schema)};
  nlohmann::json cj = nlohmann::json::object();
  if (a.config) {
    inputs.push_back(digest(*a.config));
    cj = read_json_file(*a.config);
  }
  std::vector<double> qs, ks;
  std::vector<int> js;
  if (cj.is_object() && cj.contains("sweep")) {
    const nlohmann::json sw = cj.at("sweep");
    cj.erase("sweep");
    try {
      if (sw.contains("q")) qs = sw.at("q").get<std::vector<double>>();
      if (sw.contains("k")) ks = sw.at("k").get<std::vector<double>>();
      if (sw.contains("trees")) js = sw.at("trees").get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("cli", "'sweep' entries must be numeric lists");
    }
  }
  const bool has_seed = a.seed.has_value() || (cj.is_object() && cj.contains("seed"));
  if (!has_seed) throw ConfigError("cli", "crossval needs --seed or a seed in the config");
  gibbs::FitConfig base = gibbs::fit_config_from_json(cj);
  if (a.seed) base.seed = *a.seed;
  if (a.full_grid) {
    qs = {0.25, 0.5, 0.9, 0.99};
    ks = {1.0, 2.0, 3.0};
    js = {50, 200, 400};
  }
  if (qs.empty()) qs = {base.hyper.q};
  if (ks.empty()) ks = {base.prior.k};
  if (js.empty()) js = {base.prior.trees};
  if (a.folds < 2) throw ConfigError("cli", "--folds must be at least 2");

  const data::CovariateSchema schema = data::CovariateSchema::load(a.schema);
  const data::EncodedDataset data = data::load_dataset(a.data, schema);
  make_out_dir(a.out);
  std::ostringstream csv;
  csv << "setting,q,k,trees,fold,score\n";
  std::size_t setting = 0;
  for (double q : qs)
    for (double k : ks)
      for (int J : js) {
        ++setting;
        gibbs::FitConfig cfg = base;
        cfg.hyper.q = q;
        cfg.prior.k = k;
        cfg.prior.trees = J;
        cfg.validate();
        const sim::CvResult r = sim::cross_validation_score(data, a.folds, base.seed, sim::bart_fit_predict(cfg));
        for (std::size_t f = 0; f < r.fold_scores.size(); ++f)
          csv << setting << ',' << num(q) << ',' << num(k) << ',' << J << ',' << f + 1 << ',' << num(r.fold_scores[f]) << '\n';
        csv << setting << ',' << num(q) << ',' << num(k) << ',' << J << ",mean," << num(r.mean) << '\n';
      }
  {
    std::ofstream os(a.out / "crossval.csv", std::ios::binary);
    os << csv.str();
  }
  nlohmann::json echo = gibbs::to_json(base);
  echo["folds"] = a.folds;
  echo["sweep"] = {{"q", qs}, {"k", ks}, {"trees", js}};
  write_manifest(a.out, "crossval", echo, base.seed, inputs, started);
}

void cmd_calibrate(const CalibrateArgs& a) {
  const std::string started = utc_now();
  std::vector<Input> inputs;
  nlohmann::json cj = nlohmann::json::object();
  if (a.config) {
    inputs.push_back(digest(*a.config));
    cj = read_json_file(*a.config);
  }
  gibbs::FitConfig cfg = gibbs::fit_config_from_json(cj);
  if (a.seed) cfg.seed = *a.seed;
  if (a.draws) cfg.calibration_draws = *a.draws;
  if (a.q) cfg.hyper.q = *a.q;
  cfg.validate();
  Rng rng = Rng::stream(cfg.seed, 0, StreamId::kCalibration);
  const cdp::CalibrationResult r = cdp::calibrate_scale(a.sigma_w, cfg.hyper, cfg.calibration_draws, rng);
  std::printf("%.17g\n", r.sigma_tau_sq);
  if (a.out) {
    make_out_dir(*a.out);
    const nlohmann::json j = {{"sigma_w", a.sigma_w},          {"sigma_tau_sq", r.sigma_tau_sq},
                              {"factor_quantile", r.factor_quantile}, {"draws", r.draws},
                              {"discarded", r.discarded}};
    std::ofstream os(*a.out / "calibration.json", std::ios::binary);
    os << j.dump(2) << '\n';
    write_manifest(*a.out, "calibrate", gibbs::to_json(cfg), cfg.seed, inputs, started);
  }
}

}  // namespace npaft::cli
