#include "npaft/sim/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include "npaft/data/lognormal_aft.hpp"
#include "npaft/error.hpp"
#include "npaft/hte/hte.hpp"
#include "npaft/stats.hpp"

namespace npaft::sim {

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kAftLinearNull: return "aft-linear-null";
    case ScenarioKind::kCoxNull: return "cox-null";
    case ScenarioKind::kFriedmanHte: return "friedman-hte";
    case ScenarioKind::kFixedRegression: return "fixed-regression";
  }
  return "?";
}

ScenarioKind parse_kind(const std::string& s) {
  for (ScenarioKind k : {ScenarioKind::kAftLinearNull, ScenarioKind::kCoxNull, ScenarioKind::kFriedmanHte,
                         ScenarioKind::kFixedRegression})
    if (s == kind_name(k)) return k;
  throw ConfigError("sim", "unknown scenario kind '" + s + "'");
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config", std::string("bad value for '") + key + "'");
  }
}

void only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError("config", "'" + where + "' must be an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("config", "unknown key '" + item.key() + "' in " + where);
  }
}

Scenario scenario_from_json(const nlohmann::json& j, std::size_t index) {
  only_keys(j, {"name", "kind", "n", "family", "residual_sd", "censoring", "light_target", "heavy_target", "seed",
                "coefs", "weibull", "friedman"},
            "scenario");
  Scenario s;
  std::string kind = "aft-linear-null", family = "normal", censoring = "none";
  take(j, "kind", kind);
  take(j, "family", family);
  take(j, "censoring", censoring);
  s.kind = parse_kind(kind);
  s.family = parse_family(family);
  s.censoring = parse_censoring(censoring);
  s.name = "scenario" + std::to_string(index + 1);
  take(j, "name", s.name);
  take(j, "n", s.n);
  if (s.kind == ScenarioKind::kFriedmanHte) s.residual_sd = s.friedman.noise_sd;
  take(j, "residual_sd", s.residual_sd);
  take(j, "light_target", s.light_target);
  take(j, "heavy_target", s.heavy_target);
  take(j, "seed", s.seed);
  if (j.contains("coefs")) {
    const auto& c = j.at("coefs");
    only_keys(c, {"beta0", "beta1", "continuous", "binary", "interactions"}, "coefs");
    take(c, "beta0", s.coefs.beta0);
    take(c, "beta1", s.coefs.beta1);
    take(c, "continuous", s.coefs.continuous);
    take(c, "binary", s.coefs.binary);
    take(c, "interactions", s.coefs.interactions);
  }
  if (j.contains("weibull")) {
    const auto& w = j.at("weibull");
    only_keys(w, {"shape", "scale"}, "weibull");
    take(w, "shape", s.weibull.shape);
    take(w, "scale", s.weibull.scale);
  }
  if (j.contains("friedman")) {
    const auto& f = j.at("friedman");
    only_keys(f, {"p", "baseline_terms", "effect_terms", "null_effect"}, "friedman");
    take(f, "p", s.friedman.p);
    take(f, "baseline_terms", s.friedman.baseline_terms);
    take(f, "effect_terms", s.friedman.effect_terms);
    take(f, "null_effect", s.friedman.null_effect);
  }
  s.friedman.noise_sd = s.residual_sd;
  s.friedman.family = s.family;
  if (s.n < 2) throw ConfigError("sim", "scenario n must be at least 2");
  if (!(s.residual_sd > 0.0)) throw ConfigError("sim", "residual_sd must be positive");
  return s;
}

}  // namespace

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j) {
  only_keys(j, {"reps", "fit", "baseline", "scenarios"}, "benchmark config");
  BenchmarkConfig c;
  take(j, "reps", c.reps);
  take(j, "baseline", c.baseline);
  if (j.contains("fit")) c.fit = gibbs::fit_config_from_json(j.at("fit"));
  if (!j.contains("scenarios") || !j.at("scenarios").is_array() || j.at("scenarios").empty())
    throw ConfigError("sim", "benchmark config needs a non-empty 'scenarios' list");
  for (std::size_t k = 0; k < j.at("scenarios").size(); ++k) c.scenarios.push_back(scenario_from_json(j.at("scenarios")[k], k));
  if (c.reps < 1) throw ConfigError("sim", "reps must be at least 1");
  return c;
}

nlohmann::json to_json(const BenchmarkConfig& c) {
  nlohmann::json sc = nlohmann::json::array();
  for (const Scenario& s : c.scenarios)
    sc.push_back({{"name", s.name},
                  {"kind", kind_name(s.kind)},
                  {"n", s.n},
                  {"family", family_name(s.family)},
                  {"residual_sd", s.residual_sd},
                  {"censoring", censoring_name(s.censoring)},
                  {"light_target", s.light_target},
                  {"heavy_target", s.heavy_target},
                  {"seed", s.seed},
                  {"coefs", {{"beta0", s.coefs.beta0}, {"beta1", s.coefs.beta1}, {"continuous", s.coefs.continuous},
                             {"binary", s.coefs.binary}, {"interactions", s.coefs.interactions}}},
                  {"weibull", {{"shape", s.weibull.shape}, {"scale", s.weibull.scale}}},
                  {"friedman", {{"p", s.friedman.p}, {"baseline_terms", s.friedman.baseline_terms},
                                {"effect_terms", s.friedman.effect_terms}, {"null_effect", s.friedman.null_effect}}}});
  return {{"reps", c.reps}, {"baseline", c.baseline}, {"fit", gibbs::to_json(c.fit)}, {"scenarios", sc}};
}

SimData generate_replication(const Scenario& s, std::size_t rep) {
  const auto sim_id = static_cast<std::uint64_t>(StreamId::kSimulation);
  Rng data_rng = Rng::derive(s.seed, {sim_id, rep, 1});
  Rng cens_rng = Rng::derive(s.seed, {sim_id, rep, 2});
  SimData sim;
  switch (s.kind) {
    case ScenarioKind::kAftLinearNull:
      sim = gen_null_aft(s.coefs, s.family, s.residual_sd, s.n, data_rng);
      break;
    case ScenarioKind::kFixedRegression:
      sim = gen_linear(s.coefs, s.family, s.residual_sd, s.n, data_rng);
      break;
    case ScenarioKind::kCoxNull:
      sim = gen_null_cox(s.coefs, s.weibull, s.n, data_rng);
      break;
    case ScenarioKind::kFriedmanHte: {
      // Functions depend on (seed, rep) only, so scenarios differing in n
      // share them.
      Rng fn_rng = Rng::derive(s.seed, {sim_id, rep, 0});
      const FriedmanFunctions f = gen_friedman_functions(s.friedman, fn_rng);
      sim = gen_friedman_scenario(f, s.friedman, s.n, data_rng);
      break;
    }
  }
  apply_censoring(sim, censoring_target(s.censoring, s.light_target, s.heavy_target), cens_rng);
  return sim;
}

std::uint64_t replication_fit_seed(const Scenario& s, std::size_t rep, std::uint64_t fit_seed) {
  Rng rng = Rng::derive(s.seed, {static_cast<std::uint64_t>(StreamId::kSimulation), rep, 3, fit_seed});
  return rng.engine()();
}

MetricRow score_bart(const SimData& sim, const gibbs::FitConfig& config) {
  const gibbs::PosteriorDraws draws = gibbs::fit(sim.data, config);
  const hte::IteDraws ite = hte::ite_draws(draws);
  const hte::IteSummary s = hte::summarize_ite(ite);
  const hte::DteSummary dte = hte::differential_effect(ite);
  const std::vector<int> alloc = hte::allocate(ite, hte::AllocationRule::kMisclassification);
  return score_replication(sim.true_theta, s.mean, s.lower, s.upper, alloc, dte.pct_strong, dte.pct_mild);
}

MetricRow score_parametric(const SimData& sim) {
  const data::ParametricAftResult fit = data::fit_parametric_aft(sim.data, true);
  const std::size_t n = sim.data.size();
  std::vector<double> lo(n), hi(n);
  std::vector<int> alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = fit.ite[i] - 1.959963984540054 * fit.ite_se[i];
    hi[i] = fit.ite[i] + 1.959963984540054 * fit.ite_se[i];
    alloc[i] = fit.ite[i] > 0.0 ? 1 : 0;
  }
  return score_replication(sim.true_theta, fit.ite, lo, hi, alloc);
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  config.fit.validate();
  const std::size_t S = config.scenarios.size(), R = config.reps, tasks = S * R;
  BenchmarkResult out;
  out.rows.resize(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  const auto T = static_cast<std::ptrdiff_t>(tasks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < T; ++t) {
    const auto k = static_cast<std::size_t>(t);
    const Scenario& sc = config.scenarios[k / R];
    const std::size_t rep = k % R;
    try {
      const SimData sim = generate_replication(sc, rep);
      gibbs::FitConfig fc = config.fit;
      fc.seed = replication_fit_seed(sc, rep, config.fit.seed);
      ReplicationResult row;
      row.scenario = k / R;
      row.rep = rep;
      row.censored_fraction = sim.censored_fraction;
      row.bart = score_bart(sim, fc);
      if (config.baseline) row.baseline = score_parametric(sim);
      out.rows[k] = row;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t s = 0; s < S; ++s) {
    ScenarioAggregate a;
    a.reps = R;
    MetricRow base;
    std::vector<double> rmse;
    for (std::size_t r = 0; r < R; ++r) {
      const ReplicationResult& row = out.rows[s * R + r];
      a.censored_fraction += row.censored_fraction / static_cast<double>(R);
      a.mean.rmse += row.bart.rmse / static_cast<double>(R);
      a.mean.mcprop += row.bart.mcprop / static_cast<double>(R);
      a.mean.coverage += row.bart.coverage / static_cast<double>(R);
      a.mean.pct_strong += row.bart.pct_strong / static_cast<double>(R);
      a.mean.pct_mild += row.bart.pct_mild / static_cast<double>(R);
      rmse.push_back(row.bart.rmse);
      if (row.baseline) {
        base.rmse += row.baseline->rmse / static_cast<double>(R);
        base.mcprop += row.baseline->mcprop / static_cast<double>(R);
        base.coverage += row.baseline->coverage / static_cast<double>(R);
      }
    }
    a.median_rmse = stats::quantile(rmse, 0.5);
    if (config.baseline) a.baseline_mean = base;
    out.aggregates.push_back(a);
  }
  return out;
}

namespace {

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.17g", v);
  return b;
}

}  // namespace

void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkConfig& config, const BenchmarkResult& r) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("sim", "cannot write " + path.string());
  os << "scenario,kind,n,family,censoring,rep,censored_fraction,rmse,mcprop,coverage,pct_strong,pct_mild,"
        "baseline_rmse,baseline_mcprop,baseline_coverage\n";
  for (const ReplicationResult& row : r.rows) {
    const Scenario& s = config.scenarios[row.scenario];
    os << s.name << ',' << kind_name(s.kind) << ',' << s.n << ',' << family_name(s.family) << ','
       << censoring_name(s.censoring) << ',' << row.rep << ',' << num(row.censored_fraction) << ','
       << num(row.bart.rmse) << ',' << num(row.bart.mcprop) << ',' << num(row.bart.coverage) << ','
       << num(row.bart.pct_strong) << ',' << num(row.bart.pct_mild);
    if (row.baseline)
      os << ',' << num(row.baseline->rmse) << ',' << num(row.baseline->mcprop) << ',' << num(row.baseline->coverage);
    else
      os << ",,,";
    os << '\n';
  }
}

std::string format_table(const BenchmarkConfig& config, const BenchmarkResult& r) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %6s %-9s %-10s %6s %7s %7s %8s %8s %8s\n", "scenario", "n", "censoring",
                "family", "cens%", "SE", "ME", "RMSE", "MCprop", "coverage");
  out += line;
  for (std::size_t s = 0; s < config.scenarios.size(); ++s) {
    const Scenario& sc = config.scenarios[s];
    const ScenarioAggregate& a = r.aggregates[s];
    std::snprintf(line, sizeof line, "%-20s %6zu %-9s %-10s %6.1f %7.3f %7.3f %8.4f %8.4f %8.4f\n", sc.name.c_str(), sc.n,
                  censoring_name(sc.censoring), family_name(sc.family), 100.0 * a.censored_fraction, a.mean.pct_strong,
                  a.mean.pct_mild, a.mean.rmse, a.mean.mcprop, a.mean.coverage);
    out += line;
  }
  out += "SE, ME: mean percentage of patients with strong (D* > 0.95) and mild (D* > 0.8) evidence of differential effect.\n";
  return out;
}

}  // namespace npaft::sim
