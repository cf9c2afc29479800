// Timings of the main LOD building blocks on the oscillating coefficient.

#include <benchmark/benchmark.h>

#include "lodpg/coefficients.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/fem_dg.hpp"
#include "lodpg/lod.hpp"

using namespace lodpg;

namespace {

double rhs(double x, double) { return x - 0.5; }

struct CgSetup {
  TwoLevelMesh mesh;
  CoefficientField A;
  CgLodSpace space;
  Vector F;
  CgSetup(int nc, int ratio)
      : mesh(build_mesh(nc, ratio)),
        A(analytic_a_eps(mesh, 0.05)),
        space(mesh, A),
        F(restrict_to_interior(mesh, assemble_load(mesh, rhs))) {}
};

// args: n_coarse, 2k
void BM_CgCorrectors(benchmark::State& state) {
  const CgSetup s(static_cast<int>(state.range(0)), 64 / static_cast<int>(state.range(0)));
  const Layers k(state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(compute_correctors(s.space, k).correctors.size());
  state.SetLabel("k=" + k.str());
}
BENCHMARK(BM_CgCorrectors)->Args({8, 2})->Args({16, 2})->Args({16, 4})->Unit(benchmark::kMillisecond);

void BM_AssemblePg(benchmark::State& state) {
  const CgSetup s(16, 4);
  const CorrectorBasis basis = compute_correctors(s.space, Layers(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_pg(s.space, basis, s.F).matrix.nonZeros());
}
BENCHMARK(BM_AssemblePg)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_AssembleG(benchmark::State& state) {
  const CgSetup s(16, 4);
  const CorrectorBasis basis = compute_correctors(s.space, Layers(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_g(s.space, basis, s.F).matrix.nonZeros());
}
BENCHMARK(BM_AssembleG)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_CgReference(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TwoLevelMesh mesh = build_mesh(4, n / 4);
  const CoefficientField A = analytic_a_eps(mesh, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(solve_reference(mesh, A, rhs).size());
}
BENCHMARK(BM_CgReference)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_DgCorrectors(benchmark::State& state) {
  const TwoLevelMesh mesh = build_mesh(8, 8);
  const CoefficientField A = raster_to_field(synthetic_log_raster(64, 1e3, 7), mesh, true);
  const double sigma = default_sigma(A);
  const DgLodSpace space(mesh, A, sigma, DgBoundary::left_right(1.0, 0.0));
  for (auto _ : state) benchmark::DoNotOptimize(compute_correctors(space, Layers(state.range(0))).correctors.size());
}
BENCHMARK(BM_DgCorrectors)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
