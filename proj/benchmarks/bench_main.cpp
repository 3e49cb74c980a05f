#include <benchmark/benchmark.h>

#include "switchrate/instanton.hpp"
#include "switchrate/keldysh.hpp"
#include "switchrate/lindblad.hpp"

using namespace switchrate;

namespace {

SystemParams cat() {
  SystemParams p;
  p.kappa2 = 1.0;
  p.kappa1 = 0.01;
  p.alpha0_sq = 4.0;
  return p;
}

void BM_build_lindbladian(benchmark::State& st) {
  const SystemParams p = cat();
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(build_lindbladian(p, n));
}
BENCHMARK(BM_build_lindbladian)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_iterative_gap(benchmark::State& st) {
  const Superoperator op = build_lindbladian(cat(), static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(dissipative_gap(op, {.method = GapMethod::iterative}).gap);
}
BENCHMARK(BM_iterative_gap)->Arg(30)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_dense_gap(benchmark::State& st) {
  const Superoperator op = build_lindbladian(cat(), 16);
  for (auto _ : st) benchmark::DoNotOptimize(dissipative_gap(op, {.method = GapMethod::dense}).gap);
}
BENCHMARK(BM_dense_gap)->Unit(benchmark::kMillisecond);

void BM_potential_phi(benchmark::State& st) {
  const SystemParams p = preset(Preset::kerr_oscillator);
  const PotentialCoeffs c = potential_coeffs(p);
  cplx z(1.0, 3.0);
  for (auto _ : st) {
    benchmark::DoNotOptimize(potential_phi(c, z));
    z += cplx(1e-9, 0.0);
  }
}
BENCHMARK(BM_potential_phi);

void BM_fixed_points_general(benchmark::State& st) {
  const SystemParams p = preset(Preset::kerr_oscillator);
  for (auto _ : st) benchmark::DoNotOptimize(fixed_points_general(p).points.size());
}
BENCHMARK(BM_fixed_points_general)->Unit(benchmark::kMicrosecond);

void BM_integrate(benchmark::State& st) {
  SystemParams p;
  p.kappa2 = 1.0;
  p.alpha0_sq = 4.0;
  p.kappa_phi = 0.4;
  const Vec2c x(1.9, 1.9);
  const PhaseSpaceState s = make_state(x, Vec2c(1e-4, 1e-4));
  IntegrateOptions o;
  o.store = false;
  for (auto _ : st) benchmark::DoNotOptimize(integrate(p, s, 10.0, o).accumulated_action);
}
BENCHMARK(BM_integrate)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
