// npaft: fit, summarize and benchmark the Bayesian nonparametric AFT model.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "npaft/cli/commands.hpp"
#include "npaft/error.hpp"

namespace {

constexpr int kUsageExit = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace npaft::cli;
  CLI::App app{"Bayesian nonparametric accelerated failure time models"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Run the Gibbs sampler and write posterior draws");
  c_fit->add_option("--data", fit.data, "CSV with time,status,trt and covariates")->required();
  c_fit->add_option("--schema", fit.schema, "Covariate schema (JSON)")->required();
  c_fit->add_option("--config", fit.config, "Fit configuration (JSON)");
  c_fit->add_option("--out", fit.out, "Output directory")->required();
  c_fit->add_option("--seed", fit.seed, "Root seed");
  c_fit->add_option("--chains", fit.chains, "Independent chains");
  c_fit->add_option("--iterations", fit.iterations);
  c_fit->add_option("--burn-in", fit.burn_in);
  c_fit->add_option("--thin", fit.thin);
  c_fit->add_flag("--retain-forests", fit.retain_forests, "Keep per-draw forests for out-of-sample prediction");

  SummarizeArgs sum;
  auto* c_sum = app.add_subcommand("summarize", "Treatment-effect summaries from a fit directory");
  c_sum->add_option("--draws", sum.draws, "Fit output directory")->required();
  c_sum->add_option("--out", sum.out, "Output directory")->required();
  c_sum->add_option("--bandwidth", sum.bandwidth, "Kernel bandwidth for the effect density");
  c_sum->add_option("--effect-points", sum.effect_points);
  c_sum->add_option("--time-points", sum.time_points);
  c_sum->add_option("--epsilon", sum.epsilons, "Benefit thresholds (log-time units)");

  SurvcurveArgs surv;
  auto* c_surv = app.add_subcommand("survcurve", "Posterior survival curve for one covariate profile");
  c_surv->add_option("--draws", surv.draws, "Fit output directory")->required();
  c_surv->add_option("--out", surv.out, "Output directory")->required();
  c_surv->add_option("--arm", surv.arm)->required();
  c_surv->add_option("--row", surv.row, "Training row (0-based)");
  c_surv->add_option("--x", surv.x, "Encoded covariate vector")->delimiter(',');
  c_surv->add_option("--times", surv.times, "Time grid")->delimiter(',');
  c_surv->add_option("--points", surv.points);

  PdpArgs pdp;
  auto* c_pdp = app.add_subcommand("pdp", "Partial dependence of the treatment effect on one covariate");
  c_pdp->add_option("--draws", pdp.draws, "Fit output directory (fit with --retain-forests)")->required();
  c_pdp->add_option("--data", pdp.data)->required();
  c_pdp->add_option("--schema", pdp.schema)->required();
  c_pdp->add_option("--out", pdp.out)->required();
  c_pdp->add_option("--covariate", pdp.covariate, "Encoded column name or index")->required();
  c_pdp->add_option("--grid", pdp.grid)->delimiter(',');
  c_pdp->add_option("--points", pdp.points);

  SimulateArgs simu;
  auto* c_sim = app.add_subcommand("simulate", "Run simulation benchmarks");
  c_sim->add_option("--config", simu.config, "Benchmark configuration (JSON)")->required();
  c_sim->add_option("--out", simu.out)->required();
  c_sim->add_option("--seed", simu.seed);
  c_sim->add_option("--reps", simu.reps);

  CrossvalArgs cv;
  auto* c_cv = app.add_subcommand("crossval", "K-fold censoring-weighted absolute prediction error");
  c_cv->add_option("--data", cv.data)->required();
  c_cv->add_option("--schema", cv.schema)->required();
  c_cv->add_option("--config", cv.config);
  c_cv->add_option("--out", cv.out)->required();
  c_cv->add_option("--folds", cv.folds);
  c_cv->add_option("--seed", cv.seed);
  c_cv->add_flag("--full-grid", cv.full_grid, "Sweep q, k and tree count over the 36-setting grid");

  CalibrateArgs cal;
  auto* c_cal = app.add_subcommand("calibrate", "Base-measure variance from a residual sd");
  c_cal->add_option("--sigma-w", cal.sigma_w)->required();
  c_cal->add_option("--config", cal.config);
  c_cal->add_option("--out", cal.out);
  c_cal->add_option("--seed", cal.seed);
  c_cal->add_option("--draws", cal.draws);
  c_cal->add_option("--q", cal.q);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }
  // stdout carries results (calibrate prints its value there)
  spdlog::set_default_logger(spdlog::stderr_color_st("npaft"));
  if (quiet) spdlog::set_level(spdlog::level::err);

  try {
    if (*c_fit) cmd_fit(fit);
    else if (*c_sum) cmd_summarize(sum);
    else if (*c_surv) cmd_survcurve(surv);
    else if (*c_pdp) cmd_pdp(pdp);
    else if (*c_sim) cmd_simulate(simu);
    else if (*c_cv) cmd_crossval(cv);
    else if (*c_cal) cmd_calibrate(cal);
  } catch (const npaft::Error& e) {
    std::fprintf(stderr, "npaft: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "npaft: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
