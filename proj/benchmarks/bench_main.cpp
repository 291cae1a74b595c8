#include "ecrfem/ecrfem.hpp"

#include <benchmark/benchmark.h>

using namespace ecrfem;

namespace {

const SimplexMesh& square(int level) {
  static std::vector<SimplexMesh> meshes = refine_hierarchy(build_box_mesh(2, 1), 7);
  return meshes.at(level);
}

const SimplexMesh& cube(int level) {
  static std::vector<SimplexMesh> meshes = refine_hierarchy(build_box_mesh(3, 1), 4);
  return meshes.at(level);
}

void BM_RefineSquare(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(refine_uniform(m));
  state.counters["cells"] = static_cast<double>(m.num_cells());
}
BENCHMARK(BM_RefineSquare)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_AssembleECR(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  const auto f = ScalarLoad::constant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_poisson(m, f, Family::ECR));
  state.counters["cells"] = static_cast<double>(m.num_cells());
}
BENCHMARK(BM_AssembleECR)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_SolvePoisson(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  const auto f = ScalarLoad::constant(1.0);
  const Family fam = state.range(1) == 0 ? Family::ECR : Family::CR;
  for (auto _ : state) benchmark::DoNotOptimize(solve_poisson(m, f, fam));
  state.SetLabel(to_string(fam));
}
BENCHMARK(BM_SolvePoisson)->ArgsProduct({{4, 5, 6}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SolveCondensed(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  const auto f = ScalarLoad::constant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ecr_condensed(m, f));
}
BENCHMARK(BM_SolveCondensed)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

void BM_SolveMixedPoisson(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  const auto f = ScalarLoad::constant(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_poisson_mixed(m, f));
}
BENCHMARK(BM_SolveMixedPoisson)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

void BM_SolveStokes(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  const auto f = constant_vector_load({1.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_stokes(m, f, Family::ECR));
}
BENCHMARK(BM_SolveStokes)->DenseRange(3, 5)->Unit(benchmark::kMillisecond);

void BM_SolveStokes3D(benchmark::State& state) {
  const auto& m = cube(static_cast<int>(state.range(0)));
  const auto f = constant_vector_load({1.0, 0.0, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(solve_stokes(m, f, Family::ECR));
}
BENCHMARK(BM_SolveStokes3D)->DenseRange(1, 2)->Unit(benchmark::kMillisecond);

void BM_Eigen(benchmark::State& state) {
  const auto& m = square(static_cast<int>(state.range(0)));
  const auto form = static_cast<EigenFormulation>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(solve_eigen(m, form, 1));
  state.SetLabel(to_string(form));
}
BENCHMARK(BM_Eigen)->ArgsProduct({{4, 5}, {0, 2}})->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
