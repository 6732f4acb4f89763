// Microbenchmarks for the hot paths: RNG draws, Brownian stepping, the disk
// solver, and the ball Neumann series. Rates here bound what the Monte Carlo
// experiments can afford, so regressions show up as acceptance-suite runtime.

#include <benchmark/benchmark.h>

#include "nescape/geometry.hpp"
#include "nescape/greens.hpp"
#include "nescape/helmholtz.hpp"
#include "nescape/mcsim.hpp"
#include "nescape/rng.hpp"

namespace {

using nescape::Vec3;
namespace geometry = nescape::geometry;
namespace mcsim = nescape::mcsim;

void bm_gaussian(benchmark::State& state) {
  nescape::rng::Stream s(42, 7);
  double acc = 0;
  for (auto _ : state) acc += s.gaussian();
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_gaussian);

void bm_uniform(benchmark::State& state) {
  nescape::rng::Stream s(42, 7);
  double acc = 0;
  for (auto _ : state) acc += s.uniform();
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_uniform);

// One full trajectory per iteration; max_time caps it at 50 steps so the
// items-per-second figure is a per-step rate times 50.
void bm_trajectory_ball(benchmark::State& state) {
  mcsim::SimConfig cfg;
  cfg.domain = geometry::DomainDescriptor::ball(1.0);
  cfg.windows.push_back(
      geometry::make_cap_window(cfg.domain, Vec3{0, 0, 1}, 0.25, geometry::WindowRole::escape));
  cfg.trajectories = 100;
  cfg.dt = 1e-3;
  cfg.allow_coarse_dt = true;
  cfg.max_time = 0.05;
  cfg.seed = 99;
  std::uint64_t index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcsim::sample_first_passage(cfg, index++));
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(bm_trajectory_ball);

void bm_trajectory_box(benchmark::State& state) {
  mcsim::SimConfig cfg;
  cfg.domain = geometry::DomainDescriptor::box(1.0, 1.0, 1.0);
  cfg.windows.push_back(
      geometry::make_face_window(cfg.domain, 2, -1, geometry::WindowRole::target));
  cfg.trajectories = 100;
  cfg.dt = 1e-5;
  cfg.allow_coarse_dt = true;
  cfg.max_time = 5e-4;
  cfg.seed = 99;
  std::uint64_t index = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mcsim::sample_first_passage(cfg, index++));
  }
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(bm_trajectory_box);

void bm_solve_disk(benchmark::State& state) {
  const int nodes = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nescape::helmholtz::solve_disk(0.1, 0.1, 1.0, nodes));
  }
}
BENCHMARK(bm_solve_disk)->Arg(16)->Arg(32)->Arg(64);

void bm_neumann_ball(benchmark::State& state) {
  const int degree = static_cast<int>(state.range(0));
  const Vec3 x{0.3, 0.1, 0.2}, y{-0.2, 0.4, 0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(nescape::greens::neumann_ball(x, y, 1.0, degree));
  }
}
BENCHMARK(bm_neumann_ball)->Arg(16)->Arg(64)->Arg(256);

void bm_patch_v0(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(nescape::greens::patch_v0(1.0, 1.0, 0.1, 1e-3));
  }
}
BENCHMARK(bm_patch_v0);

} // namespace

BENCHMARK_MAIN();
