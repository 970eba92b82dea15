#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace npaft::cli {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "0.3.0";

// File names inside an output directory.
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kDrawFile = "draws.csv";
inline constexpr const char* kDiagnosticsFile = "diagnostics.csv";
inline constexpr const char* kForestFile = "forests.txt";

struct FitArgs {
  fs::path data, schema, out;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> chains, iterations, burn_in, thin;
  bool retain_forests = false;
};

struct SummarizeArgs {
  fs::path draws, out;
  std::optional<double> bandwidth;
  std::size_t effect_points = 201;
  std::size_t time_points = 100;
  std::vector<double> epsilons;
};

struct SurvcurveArgs {
  fs::path draws, out;
  int arm = 0;
  std::optional<std::size_t> row;
  std::vector<double> x;  // encoded covariates; requires retained forests
  std::vector<double> times;
  std::size_t points = 100;
};

struct PdpArgs {
  fs::path draws, data, schema, out;
  std::string covariate;  // name or 0-based index among encoded columns
  std::vector<double> grid;
  std::size_t points = 25;
};

struct SimulateArgs {
  fs::path config, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
};

struct CrossvalArgs {
  fs::path data, schema, out;
  std::optional<fs::path> config;
  std::size_t folds = 10;
  std::optional<std::uint64_t> seed;
  bool full_grid = false;
};

struct CalibrateArgs {
  double sigma_w = 1.0;
  std::optional<fs::path> config;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> draws;
  std::optional<double> q;
};

void cmd_fit(const FitArgs& a);
void cmd_summarize(const SummarizeArgs& a);
void cmd_survcurve(const SurvcurveArgs& a);
void cmd_pdp(const PdpArgs& a);
void cmd_simulate(const SimulateArgs& a);
void cmd_crossval(const CrossvalArgs& a);
// Prints sigma_tau^2 to stdout; writes calibration.json too when out is set.
void cmd_calibrate(const CalibrateArgs& a);

nlohmann::json read_json_file(const fs::path& path);

struct Input {
  fs::path path;
  std::string sha256;
};

// Writes manifest.json: command, config echo, seed, input digests, version,
// start and finish times.
void write_manifest(const fs::path& out, const std::string& command, const nlohmann::json& config,
                    std::optional<std::uint64_t> seed, const std::vector<Input>& inputs,
                    const std::string& started);
std::string utc_now();

}  // namespace npaft::cli
