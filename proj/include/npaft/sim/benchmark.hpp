#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npaft/gibbs/engine.hpp"
#include "npaft/sim/generators.hpp"
#include "npaft/sim/metrics.hpp"

namespace npaft::sim {

enum class ScenarioKind { kAftLinearNull, kCoxNull, kFriedmanHte, kFixedRegression };
const char* kind_name(ScenarioKind k);
ScenarioKind parse_kind(const std::string& s);

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::kAftLinearNull;
  std::size_t n = 200;
  ResidualFamily family = ResidualFamily::kNormal;
  double residual_sd = 0.8;
  Censoring censoring = Censoring::kNone;
  double light_target = 0.20;
  double heavy_target = 0.45;
  std::uint64_t seed = 1;  // scenarios sharing a seed share per-replication functions and streams
  LinearCoefs coefs;
  WeibullBaseline weibull;
  FriedmanOptions friedman;
};

struct BenchmarkConfig {
  std::vector<Scenario> scenarios;
  std::size_t reps = 1;
  gibbs::FitConfig fit;
  bool baseline = true;
};

BenchmarkConfig benchmark_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BenchmarkConfig& c);

// Uncensored then censored data for one replication.
SimData generate_replication(const Scenario& s, std::size_t rep);
std::uint64_t replication_fit_seed(const Scenario& s, std::size_t rep, std::uint64_t fit_seed);

struct ReplicationResult {
  std::size_t scenario = 0;
  std::size_t rep = 0;
  double censored_fraction = 0.0;
  MetricRow bart;
  std::optional<MetricRow> baseline;
};

struct ScenarioAggregate {
  std::size_t reps = 0;
  double censored_fraction = 0.0;
  MetricRow mean;
  double median_rmse = 0.0;
  std::optional<MetricRow> baseline_mean;
};

struct BenchmarkResult {
  std::vector<ReplicationResult> rows;
  std::vector<ScenarioAggregate> aggregates;
};

// Scores BART on one simulated dataset.
MetricRow score_bart(const SimData& sim, const gibbs::FitConfig& config);
MetricRow score_parametric(const SimData& sim);

// Replications run in parallel; results are ordered by (scenario, rep).
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkConfig& config, const BenchmarkResult& r);
// Mean percentage of patients with strong (SE) and mild (ME) evidence per
// scenario, plus the accuracy metrics.
std::string format_table(const BenchmarkConfig& config, const BenchmarkResult& r);

}  // namespace npaft::sim
