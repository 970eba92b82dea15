#include "npaft/gibbs/draw_io.hpp"

#include <cstdlib>
#include <sstream>
#include <string>

#include "npaft/digest.hpp"
#include "npaft/error.hpp"

namespace npaft::gibbs {

namespace {

const char* kMoveNames[] = {"grow", "prune", "change", "swap"};

nlohmann::json header_of(const PosteriorDraws& d) {
  const std::size_t H = d.H, n = d.n;
  nlohmann::json cols = {
      {"chain", 0},
      {"iteration", 1},
      {"M", 2},
      {"sigma", 3},
      {"pi", {4, 4 + H}},
      {"tau", {4 + H, 4 + 2 * H}},
      {"m0", {4 + 2 * H, 4 + 2 * H + n}},
      {"m1", {4 + 2 * H + n, 4 + 2 * H + 2 * n}},
  };
  return {
      {"format", "npaft-draws"},
      {"version", kDrawFormatVersion},
      {"n", n},
      {"H", H},
      {"count", d.count},
      {"seed", d.config.seed},
      {"config", to_json(d.config)},
      {"sigma_tau_sq", d.config.hyper.sigma_tau_sq},
      {"transform", {{"mu_aft", d.transform.mu_aft}, {"sigma_aft", d.transform.sigma_aft},
                     {"sigma_clamped", d.transform.sigma_clamped}}},
      {"calibration", {{"factor_quantile", d.calibration.factor_quantile},
                       {"draws", d.calibration.draws}, {"discarded", d.calibration.discarded}}},
      {"zeta", d.prior.zeta},
      {"truncation_hit_fraction", d.truncation_hit_fraction},
      {"columns", cols},
  };
}

// Splits a CSV line of numbers; throws on a field count mismatch.
void parse_row(const std::string& line, std::vector<double>& out, std::size_t expect, std::size_t lineno) {
  out.clear();
  const char* p = line.c_str();
  const char* end = p + line.size();
  while (p < end) {
    char* next = nullptr;
    const double v = std::strtod(p, &next);
    if (next == p) throw InputError("gibbs", "malformed draw row " + std::to_string(lineno));
    out.push_back(v);
    p = next;
    if (p < end && *p == ',') ++p;
  }
  if (out.size() != expect)
    throw InputError("gibbs", "draw row " + std::to_string(lineno) + " has " + std::to_string(out.size()) +
                                  " fields, expected " + std::to_string(expect));
}

}  // namespace

void write_draws(const std::filesystem::path& path, const PosteriorDraws& d) {
  HashedWriter w(path);
  w.write(header_of(d).dump());
  w.write("\n");
  const std::size_t H = d.H, n = d.n;
  for (std::size_t k = 0; k < d.count; ++k) {
    w.write(std::to_string(d.diagnostics[k].chain));
    w.write(",");
    w.write(std::to_string(d.diagnostics[k].iteration));
    auto put = [&](double v) {
      w.write(",");
      w.write_double(v);
    };
    put(d.M[k]);
    put(d.sigma[k]);
    for (std::size_t h = 0; h < H; ++h) put(d.pi[k * H + h]);
    for (std::size_t h = 0; h < H; ++h) put(d.tau[k * H + h]);
    for (std::size_t i = 0; i < n; ++i) put(d.m0[k * n + i]);
    for (std::size_t i = 0; i < n; ++i) put(d.m1[k * n + i]);
    w.write("\n");
  }
  w.finish();
}

PosteriorDraws read_draws(const std::filesystem::path& path) {
  const std::string text = read_verified(path, "gibbs");
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw InputError("gibbs", "draw file header is not valid JSON");
  }
  if (h.value("format", "") != "npaft-draws" || h.value("version", 0) != kDrawFormatVersion)
    throw InputError("gibbs", "unsupported draw file format");

  PosteriorDraws d;
  d.n = h.at("n").get<std::size_t>();
  d.H = h.at("H").get<std::size_t>();
  d.count = h.at("count").get<std::size_t>();
  d.config = fit_config_from_json(h.at("config"));
  d.config.hyper.sigma_tau_sq = h.at("sigma_tau_sq").get<double>();
  d.transform.mu_aft = h.at("transform").at("mu_aft").get<double>();
  d.transform.sigma_aft = h.at("transform").at("sigma_aft").get<double>();
  d.transform.sigma_clamped = h.at("transform").at("sigma_clamped").get<bool>();
  d.calibration.sigma_tau_sq = d.config.hyper.sigma_tau_sq;
  d.calibration.factor_quantile = h.at("calibration").at("factor_quantile").get<double>();
  d.calibration.draws = h.at("calibration").at("draws").get<std::size_t>();
  d.calibration.discarded = h.at("calibration").at("discarded").get<std::size_t>();
  d.prior = d.config.prior;
  d.prior.zeta = h.at("zeta").get<double>();
  d.truncation_hit_fraction = h.at("truncation_hit_fraction").get<double>();

  const std::size_t H = d.H, n = d.n, width = 4 + 2 * H + 2 * n;
  std::vector<double> row;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    parse_row(line, row, width, lineno);
    DrawDiagnostics diag;
    diag.chain = static_cast<std::size_t>(row[0]);
    diag.iteration = static_cast<std::size_t>(row[1]);
    d.diagnostics.push_back(diag);
    d.M.push_back(row[2]);
    d.sigma.push_back(row[3]);
    d.pi.insert(d.pi.end(), row.begin() + 4, row.begin() + 4 + H);
    d.tau.insert(d.tau.end(), row.begin() + 4 + H, row.begin() + 4 + 2 * H);
    d.m0.insert(d.m0.end(), row.begin() + 4 + 2 * H, row.begin() + 4 + 2 * H + n);
    d.m1.insert(d.m1.end(), row.begin() + 4 + 2 * H + n, row.end());
  }
  if (d.sigma.size() != d.count)
    throw InputError("gibbs", "draw file holds " + std::to_string(d.sigma.size()) + " rows, header says " +
                                  std::to_string(d.count));
  return d;
}

void write_diagnostics(const std::filesystem::path& path, const PosteriorDraws& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("gibbs", "cannot write " + path.string());
  os << "chain,iteration";
  for (const char* m : kMoveNames) os << ',' << m << "_proposed," << m << "_accepted";
  os << ",occupied,max_index\n";
  for (const DrawDiagnostics& g : d.diagnostics) {
    os << g.chain << ',' << g.iteration;
    for (std::size_t k = 0; k < bart::kMoveTypeCount; ++k) os << ',' << g.moves.proposed[k] << ',' << g.moves.accepted[k];
    os << ',' << g.occupied << ',' << g.max_index << '\n';
  }
}

void write_forests(const std::filesystem::path& path, const PosteriorDraws& d) {
  if (d.forests.size() != d.count)
    throw ConfigError("gibbs", "forest checkpoints absent; refit with retain_forests enabled");
  HashedWriter w(path);
  w.write("npaft-forests 1 " + std::to_string(d.count) + "\n");
  for (const auto& f : d.forests) {
    std::ostringstream os;
    bart::write_compact(os, f);
    w.write(os.str());
  }
  w.finish();
}

void read_forests(const std::filesystem::path& path, PosteriorDraws& d) {
  const std::string text = read_verified(path, "gibbs");
  std::istringstream is(text);
  std::string tag;
  int version = 0;
  std::size_t count = 0;
  if (!(is >> tag >> version >> count) || tag != "npaft-forests" || version != 1)
    throw InputError("gibbs", "unsupported forest checkpoint format");
  if (count != d.count) throw InputError("gibbs", "forest checkpoint does not match the draw file");
  d.forests.clear();
  for (std::size_t k = 0; k < count; ++k) d.forests.push_back(bart::read_compact(is));
}

}  // namespace npaft::gibbs
