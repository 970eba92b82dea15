// OpenMP kernels against their serial references on posterior-sized inputs.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <vector>

#include "npaft/cdp/calibration.hpp"
#include "npaft/hte/hte.hpp"
#include "npaft/rng.hpp"

using namespace npaft;

namespace {

// S draws by n patients of mildly heterogeneous effects
hte::IteDraws make_ite(std::size_t S, std::size_t n) {
  Rng rng(17);
  std::vector<double> base(n);
  for (double& b : base) b = rng.normal(0.2, 0.3);
  std::vector<double> theta(S * n);
  for (std::size_t d = 0; d < S; ++d)
    for (std::size_t i = 0; i < n; ++i) theta[d * n + i] = base[i] + rng.normal(0.0, 0.2);
  return hte::ite_from_matrix(std::move(theta), S, n);
}

const hte::IteDraws& shared_ite(std::size_t n) {
  static const hte::IteDraws small = make_ite(5000, 200);
  static const hte::IteDraws large = make_ite(5000, 1000);
  return n == 200 ? small : large;
}

std::vector<double> grid(std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) g[k] = -1.0 + 2.5 * static_cast<double>(k) / static_cast<double>(points - 1);
  return g;
}

void BM_DifferentialEffect(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hte::differential_effect(ite));
}
void BM_DifferentialEffectReference(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hte::reference::differential_effect(ite));
}

void BM_ProportionBenefiting(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hte::proportion_benefiting(ite));
}
void BM_ProportionBenefitingReference(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hte::reference::proportion_benefiting(ite));
}

void BM_EffectDensity(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  const auto g = grid(201);
  for (auto _ : st) benchmark::DoNotOptimize(hte::effect_density(ite, g, 0.05));
}
void BM_EffectDensityReference(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  const auto g = grid(201);
  for (auto _ : st) benchmark::DoNotOptimize(hte::reference::effect_density(ite, g, 0.05));
}

void BM_EffectCdf(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hte::effect_cdf(ite, grid(201)));
}
void BM_EffectCdfReference(benchmark::State& st) {
  const auto& ite = shared_ite(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(hte::reference::effect_cdf(ite, grid(201)));
}

void BM_CalibrationDraws(benchmark::State& st) {
  cdp::CdpHyper h;
  for (auto _ : st) benchmark::DoNotOptimize(cdp::scale_factor_draws(h, cdp::kCalibrationDraws, 3));
}
void BM_CalibrationDrawsReference(benchmark::State& st) {
  cdp::CdpHyper h;
  for (auto _ : st) benchmark::DoNotOptimize(cdp::reference::scale_factor_draws(h, cdp::kCalibrationDraws, 3));
}

}  // namespace

BENCHMARK(BM_DifferentialEffect)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DifferentialEffectReference)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProportionBenefiting)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProportionBenefitingReference)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectDensity)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectDensityReference)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectCdf)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EffectCdfReference)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrationDraws)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrationDrawsReference)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
