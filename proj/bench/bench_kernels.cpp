#include <benchmark/benchmark.h>

#include "chaos_anneal/hilbert.hpp"
#include "chaos_anneal/langevin.hpp"
#include "chaos_anneal/wigner.hpp"

using namespace chaos_anneal;

namespace {

model::DimensionlessParams small_params() {
  model::DimensionlessParams d;
  d.delta = -0.5;
  d.kappa = 0.4;
  d.gamma = 0.1;
  d.g = 0.3;
  d.chi = 0.1;
  d.drive = 0.6;
  d.n_bar_b = 1.0;
  return d;
}

langevin::EnsembleConfig langevin_config() {
  langevin::EnsembleConfig cfg;
  cfg.n_traj = 256;
  cfg.integration.t_end = 10.0;
  cfg.integration.dt = 1e-3;
  cfg.integration.stride = 100;
  return cfg;
}

void BM_LangevinSerial(benchmark::State& state) {
  const auto d = small_params();
  const langevin::NoiseConfig noise{0.0, d.n_bar_b, 1, true};
  const auto cfg = langevin_config();
  for (auto _ : state) benchmark::DoNotOptimize(langevin::reference::simulate_ensemble(d, noise, cfg));
}

void BM_LangevinParallel(benchmark::State& state) {
  const auto d = small_params();
  const langevin::NoiseConfig noise{0.0, d.n_bar_b, 1, true};
  auto cfg = langevin_config();
  cfg.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(langevin::simulate_ensemble(d, noise, cfg));
}

hilbert::JumpEnsembleConfig jump_config() {
  hilbert::JumpEnsembleConfig cfg;
  cfg.n_traj = 64;
  cfg.seed = 1;
  cfg.trajectory.t_end = 5.0;
  cfg.trajectory.dt = 1e-2;
  cfg.trajectory.stride = 10;
  return cfg;
}

void BM_JumpSerial(benchmark::State& state) {
  const hilbert::JumpModel model(small_params(), {8, 12});
  const auto psi0 = hilbert::PureState::vacuum(model.dims());
  const auto cfg = jump_config();
  for (auto _ : state) benchmark::DoNotOptimize(hilbert::reference::simulate_jump_ensemble(psi0, model, cfg));
}

void BM_JumpParallel(benchmark::State& state) {
  const hilbert::JumpModel model(small_params(), {8, 12});
  const auto psi0 = hilbert::PureState::vacuum(model.dims());
  auto cfg = jump_config();
  cfg.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(hilbert::simulate_jump_ensemble(psi0, model, cfg));
}

hilbert::DensityMatrix thermal_like(std::size_t dim) {
  hilbert::DensityMatrix rho{hilbert::Dense::Zero(dim, dim)};
  double total = 0.0;
  for (std::size_t n = 0; n < dim; ++n) total += std::pow(0.7, n);
  for (std::size_t n = 0; n < dim; ++n) {
    rho.entries(n, n) = std::pow(0.7, n) / total;
    if (n + 1 < dim) rho.entries(n, n + 1) = rho.entries(n + 1, n) = 0.01;
  }
  return rho;
}

void BM_WignerSerial(benchmark::State& state) {
  const auto rho = thermal_like(20);
  const auto grid = wigner::default_grid(20, 101);
  for (auto _ : state) benchmark::DoNotOptimize(wigner::reference::wigner_from_density(rho, grid));
}

void BM_WignerParallel(benchmark::State& state) {
  const auto rho = thermal_like(20);
  const auto grid = wigner::default_grid(20, 101);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wigner::wigner_from_density(rho, grid, static_cast<int>(state.range(0))));
  }
}

}  // namespace

BENCHMARK(BM_LangevinSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LangevinParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_JumpSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_JumpParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WignerSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WignerParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
