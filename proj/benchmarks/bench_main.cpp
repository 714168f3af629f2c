#include <memory>

#include <benchmark/benchmark.h>

#include "cavpend/compressible.hpp"
#include "cavpend/incompressible.hpp"
#include "cavpend/steady.hpp"

using namespace cavpend;

namespace {

std::shared_ptr<const Mesh> disk(double h) {
  return std::make_shared<const Mesh>(generate_disk_mesh({0.4, 0.0}, 0.1, h));
}

double h_of(const benchmark::State& state) { return 1.0 / static_cast<double>(state.range(0)); }

void BM_MeshGeneration(benchmark::State& state) {
  const double h = h_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(generate_disk_mesh({0.4, 0.0}, 0.1, h));
}
BENCHMARK(BM_MeshGeneration)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_MomentumAssembly(benchmark::State& state) {
  const auto mesh = disk(h_of(state));
  const CoupledState s = initial_state(*mesh, 1.0, 0.05, 0.1);
  const MomentumInputs in{s.fluid.rho, s.fluid.rho, s.fluid.u, 0.1, Vec2(1.0, 0.05), 1e-3};
  for (auto _ : state) benchmark::DoNotOptimize(assemble_momentum_angular(in, BodyGeometry{}, GasParams{}, *mesh));
  state.counters["elements"] = mesh->num_elements();
}
BENCHMARK(BM_MomentumAssembly)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_CompressibleStep(benchmark::State& state) {
  const auto mesh = disk(h_of(state));
  CompressibleSolver solver(mesh, BodyGeometry{}, GasParams{});
  CoupledState s = initial_state(*mesh, 1.0, 0.05, 0.0);
  for (auto _ : state) s = solver.step(s, 1e-3);
  state.counters["elements"] = mesh->num_elements();
}
BENCHMARK(BM_CompressibleStep)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_IncompressibleStep(benchmark::State& state) {
  const auto mesh = disk(h_of(state));
  IncompressibleSolver solver(mesh, BodyGeometry{}, 100.0, 0.0);
  IncompressibleState fluid{CRField(*mesh), P0Field(*mesh), 1.0};
  BodyState body;
  body.theta = 0.05;
  body.gravity = gravity_from_theta(body.theta);
  for (auto _ : state) {
    IncompressibleStepResult r = solver.step(fluid, body, 1e-3);
    fluid = std::move(r.fluid);
    body = r.body;
  }
  state.counters["elements"] = mesh->num_elements();
}
BENCHMARK(BM_IncompressibleStep)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SteadyScan(benchmark::State& state) {
  const auto mesh = disk(0.01);
  const Cavity cavity = Cavity::from_mesh(mesh, mesh->total_area());
  const Vec2 l = BodyGeometry{}.first_moment();
  const int n_scan = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_equilibria(cavity, Vec3(l.x(), l.y(), 0.0), GasParams{}, 1.0, n_scan));
  }
}
BENCHMARK(BM_SteadyScan)->Arg(90)->Arg(360)->Unit(benchmark::kMillisecond);

void BM_SolveC(benchmark::State& state) {
  const Cavity box = Cavity::from_box({{-1, -1, -1}, {1, 1, 1}}, 4.0);
  GasParams gas;
  gas.gamma = 2.0;
  gas.a = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(solve_c(Vec3(0.6, 0.8, 0.0), box, gas));
}
BENCHMARK(BM_SolveC);

}  // namespace

BENCHMARK_MAIN();
