#include "npaft/gibbs/engine.hpp"

#include <cmath>
#include <exception>
#include <string>

#include <spdlog/spdlog.h>

#include "npaft/bart/forest.hpp"
#include "npaft/data/split_grid.hpp"
#include "npaft/error.hpp"

namespace npaft::gibbs {

void FitConfig::validate() const {
  if (iterations <= burn_in) throw ConfigError("gibbs", "iterations must exceed burn_in");
  if (thin < 1) throw ConfigError("gibbs", "thin must be at least 1");
  if (chains < 1) throw ConfigError("gibbs", "chains must be at least 1");
  if (calibration_draws < 1) throw ConfigError("gibbs", "calibration_draws must be positive");
  if (max_cuts < 1 || max_cuts > 65535) throw ConfigError("gibbs", "max_cuts must lie in [1, 65535]");
  cdp::CdpHyper h = hyper;
  h.validate();
  prior.validate();
}

std::size_t FitConfig::retained_per_chain() const { return (iterations - burn_in) / thin; }

nlohmann::json to_json(const FitConfig& c) {
  return {
      {"iterations", c.iterations},
      {"burn_in", c.burn_in},
      {"thin", c.thin},
      {"seed", c.seed},
      {"chains", c.chains},
      {"calibration_draws", c.calibration_draws},
      {"max_cuts", c.max_cuts},
      {"retain_forests", c.retain_forests},
      {"hyper", {{"psi1", c.hyper.psi1}, {"psi2", c.hyper.psi2}, {"nu", c.hyper.nu}, {"q", c.hyper.q}, {"H", c.hyper.H}}},
      {"prior", {{"alpha", c.prior.alpha}, {"beta", c.prior.beta}, {"trees", c.prior.trees}, {"k", c.prior.k}}},
  };
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

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("config", "unknown key '" + where + item.key() + "'");
  }
}

}  // namespace

FitConfig fit_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config", "fit config must be a JSON object");
  reject_unknown(j, {"iterations", "burn_in", "thin", "seed", "chains", "calibration_draws", "max_cuts",
                     "retain_forests", "hyper", "prior"},
                 "");
  FitConfig c;
  take(j, "iterations", c.iterations);
  take(j, "burn_in", c.burn_in);
  take(j, "thin", c.thin);
  take(j, "seed", c.seed);
  take(j, "chains", c.chains);
  take(j, "calibration_draws", c.calibration_draws);
  take(j, "max_cuts", c.max_cuts);
  take(j, "retain_forests", c.retain_forests);
  if (j.contains("hyper")) {
    const auto& h = j.at("hyper");
    if (!h.is_object()) throw ConfigError("config", "'hyper' must be an object");
    reject_unknown(h, {"psi1", "psi2", "nu", "q", "H"}, "hyper.");
    take(h, "psi1", c.hyper.psi1);
    take(h, "psi2", c.hyper.psi2);
    take(h, "nu", c.hyper.nu);
    take(h, "q", c.hyper.q);
    take(h, "H", c.hyper.H);
  }
  if (j.contains("prior")) {
    const auto& p = j.at("prior");
    if (!p.is_object()) throw ConfigError("config", "'prior' must be an object");
    reject_unknown(p, {"alpha", "beta", "trees", "k"}, "prior.");
    take(p, "alpha", c.prior.alpha);
    take(p, "beta", c.prior.beta);
    take(p, "trees", c.prior.trees);
    take(p, "k", c.prior.k);
  }
  c.validate();
  return c;
}

const char* step_name(Step s) {
  switch (s) {
    case Step::kBackfit: return "backfit";
    case Step::kLabels: return "labels";
    case Step::kSticks: return "sticks";
    case Step::kLocations: return "locations";
    case Step::kMassScale: return "mass_scale";
    case Step::kImpute: return "impute";
  }
  return "?";
}

namespace {

struct ChainInput {
  const data::EncodedDataset* data;
  std::vector<double> log_y;  // transformed scale
  const data::SplitGrid* grid;
  const data::BinnedDesign* design;
  bart::ForestPrior prior;
  cdp::CdpHyper hyper;
  double sigma_w_hat;
  double mu_aft;
  const FitConfig* config;
  const TraceFn* trace;
};

struct ChainOutput {
  std::vector<double> m0, m1, pi, tau, sigma, M;
  std::vector<DrawDiagnostics> diagnostics;
  std::vector<bart::CompactForest> forests;
  bart::MoveCounts moves;
  std::size_t truncation_hits = 0;
};

void require_finite(double v, const char* what, std::size_t it) {
  if (!std::isfinite(v))
    throw NumericError("gibbs", std::string("non-finite ") + what + " at iteration " + std::to_string(it));
}

ChainOutput run_chain(std::size_t chain, const ChainInput& in) {
  const std::size_t n = in.log_y.size();
  const FitConfig& cfg = *in.config;
  const std::uint64_t seed = cfg.seed;
  Rng move_rng = Rng::stream(seed, chain, StreamId::kTreeMoves);
  Rng leaf_rng = Rng::stream(seed, chain, StreamId::kLeafValues);
  Rng label_rng = Rng::stream(seed, chain, StreamId::kLabels);
  Rng stick_rng = Rng::stream(seed, chain, StreamId::kSticks);
  Rng loc_rng = Rng::stream(seed, chain, StreamId::kLocations);
  Rng mass_rng = Rng::stream(seed, chain, StreamId::kMassScale);
  Rng imp_rng = Rng::stream(seed, chain, StreamId::kImputation);

  bart::Forest forest(static_cast<std::size_t>(in.prior.trees), n);
  cdp::CdpState state = cdp::init_state(n, in.hyper, in.sigma_w_hat);
  std::vector<double> z = in.log_y;
  std::vector<double> work(n), r(n);

  auto note = [&](std::size_t it, Step s) {
    if (*in.trace) {
#pragma omp critical(npaft_trace)
      (*in.trace)({chain, it, s, z});
    }
  };
  const std::size_t H = state.H();
  const std::span<const int> delta(in.data->delta);
  const std::span<const int> arms(in.data->arm);

  ChainOutput out;
  const std::size_t keep = cfg.retained_per_chain();
  out.m0.reserve(keep * n);
  out.m1.reserve(keep * n);
  out.pi.reserve(keep * H);
  out.tau.reserve(keep * H);
  std::vector<double> m0(n), m1(n);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    bart::MoveCounts sweep_moves;
    for (std::size_t i = 0; i < n; ++i) work[i] = z[i] - state.tau[static_cast<std::size_t>(state.S[i])];
    bart::backfit_sweep(forest, work, state.sigma(), in.prior, *in.grid, *in.design, move_rng, leaf_rng,
                        sweep_moves);
    note(it, Step::kBackfit);
    out.moves.merge(sweep_moves);

    const std::span<const double> m = forest.fit();
    double fit_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = z[i] - m[i];
      fit_sum += m[i];
    }
    require_finite(fit_sum, "forest fit", it);

    cdp::update_cluster_labels(state, r, label_rng);
    note(it, Step::kLabels);
    cdp::update_stick_weights(state, stick_rng);
    note(it, Step::kSticks);
    cdp::update_cluster_locations(state, r, in.hyper, loc_rng);
    note(it, Step::kLocations);
    cdp::update_mass_and_scale(state, r, in.hyper, mass_rng);
    require_finite(state.M, "mass parameter M", it);
    require_finite(state.sigma_sq, "residual variance", it);
    require_finite(state.mu_gstar, "atom mean", it);
    note(it, Step::kMassScale);
    cdp::impute_censored(state, m, in.log_y, delta, z, imp_rng);
    note(it, Step::kImpute);

    const std::size_t top = state.max_occupied_index();
    if (it >= cfg.burn_in && top == H) ++out.truncation_hits;

    if (it < cfg.burn_in || (it - cfg.burn_in + 1) % cfg.thin != 0) continue;
    bart::predict_both_arms(forest, *in.design, *in.grid, arms, m0, m1);
    for (std::size_t i = 0; i < n; ++i) {
      out.m0.push_back(m0[i] + in.mu_aft);
      out.m1.push_back(m1[i] + in.mu_aft);
    }
    out.pi.insert(out.pi.end(), state.pi.begin(), state.pi.end());
    out.tau.insert(out.tau.end(), state.tau.begin(), state.tau.end());
    out.sigma.push_back(state.sigma());
    out.M.push_back(state.M);
    out.diagnostics.push_back({chain, it, sweep_moves, state.occupied(), top});
    if (cfg.retain_forests) out.forests.push_back(bart::compact(forest));
  }
  return out;
}

}  // namespace

PosteriorDraws fit(const data::EncodedDataset& data, const FitConfig& config, const TraceFn& trace) {
  config.validate();
  data.validate();
  const std::size_t n = data.size();

  PosteriorDraws out;
  out.config = config;
  out.transform = data::fit_intercept_lognormal_aft(data);
  if (out.transform.sigma_clamped)
    spdlog::warn("fit: residual scale estimate clamped to {}", data::kMinAftSigma);
  const double sigma_w_hat = out.transform.sigma_aft;

  cdp::CdpHyper hyper = config.hyper;
  Rng cal_rng = Rng::stream(config.seed, 0, StreamId::kCalibration);
  out.calibration = cdp::calibrate_scale(sigma_w_hat, hyper, config.calibration_draws, cal_rng);
  hyper.sigma_tau_sq = out.calibration.sigma_tau_sq;
  out.config.hyper = hyper;

  out.prior = config.prior;
  out.prior.zeta = 4.0 * sigma_w_hat;
  out.prior.validate();

  const data::SplitGrid grid = data::build_split_grid(data, config.max_cuts);
  const data::BinnedDesign design = data::bin_design(data, grid);

  ChainInput in{&data, {}, &grid, &design, out.prior, hyper, sigma_w_hat, out.transform.mu_aft, &out.config, &trace};
  in.log_y.resize(n);
  for (std::size_t i = 0; i < n; ++i) in.log_y[i] = std::log(data.y[i]) - out.transform.mu_aft;

  std::vector<ChainOutput> chains(config.chains);
  std::vector<std::exception_ptr> errors(config.chains);
  const auto nchains = static_cast<std::ptrdiff_t>(config.chains);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t c = 0; c < nchains; ++c) {
    try {
      chains[static_cast<std::size_t>(c)] = run_chain(static_cast<std::size_t>(c), in);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.n = n;
  out.H = hyper.H;
  std::size_t hits = 0;
  for (ChainOutput& ch : chains) {
    out.m0.insert(out.m0.end(), ch.m0.begin(), ch.m0.end());
    out.m1.insert(out.m1.end(), ch.m1.begin(), ch.m1.end());
    out.pi.insert(out.pi.end(), ch.pi.begin(), ch.pi.end());
    out.tau.insert(out.tau.end(), ch.tau.begin(), ch.tau.end());
    out.sigma.insert(out.sigma.end(), ch.sigma.begin(), ch.sigma.end());
    out.M.insert(out.M.end(), ch.M.begin(), ch.M.end());
    out.diagnostics.insert(out.diagnostics.end(), ch.diagnostics.begin(), ch.diagnostics.end());
    for (auto& f : ch.forests) out.forests.push_back(std::move(f));
    out.chain_moves.push_back(ch.moves);
    hits += ch.truncation_hits;
  }
  out.count = out.sigma.size();
  out.truncation_hit_fraction =
      static_cast<double>(hits) / static_cast<double>((config.iterations - config.burn_in) * config.chains);
  if (out.truncation_hit_fraction > kTruncationWarnFraction)
    spdlog::warn("fit: highest mixture component occupied in {:.2f}% of sweeps; consider a larger H",
                 100.0 * out.truncation_hit_fraction);
  return out;
}

std::vector<double> predict_m(const PosteriorDraws& draws, int arm, std::span<const double> x) {
  if (draws.forests.size() != draws.count)
    throw ConfigError("gibbs", "forest checkpoints absent; refit with retain_forests enabled");
  const std::vector<double> u = data::predictor(arm, x);
  std::vector<double> out(draws.count);
  for (std::size_t d = 0; d < draws.count; ++d)
    out[d] = draws.forests[d].predict(u) + draws.transform.mu_aft;
  return out;
}

}  // namespace npaft::gibbs
