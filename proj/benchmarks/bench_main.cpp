#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "eprcs/photon_sim.hpp"
#include "eprcs/random_filters.hpp"
#include "eprcs/tv_solver.hpp"

using namespace eprcs;

namespace {

std::vector<double> random_signal(std::size_t size) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> v(size);
  for (auto& x : v) x = g(rng);
  return v;
}

void BM_SensingApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SensingPlan plan = plan_sensing(n, n * n / 4, 1);
  const SensingOperator op(plan, Domain::momentum);
  const auto x = random_signal(n * n);
  std::vector<double> y(op.rows());
  for (auto _ : state) {
    op.apply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_SensingApply)->Arg(16)->Arg(64)->Arg(256);

void BM_SensingAdjoint(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SensingPlan plan = plan_sensing(n, n * n / 4, 1);
  const SensingOperator op(plan, Domain::momentum);
  const auto y = random_signal(op.rows());
  std::vector<double> x(n * n);
  for (auto _ : state) {
    op.adjoint(y, x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SensingAdjoint)->Arg(16)->Arg(64)->Arg(256);

void BM_PortProbabilities(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SpdcParams p = SpdcParams::supplement();
  const PhotonSimulator sim(build_state(p, balanced_grid(p, n)));
  const SensingPlan plan = plan_sensing(n, 8, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.port_probabilities(filter_set(plan, i++ % 8)));
  }
}
BENCHMARK(BM_PortProbabilities)->Arg(16)->Arg(64);

void BM_TvMin(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const SensingPlan plan = plan_sensing(16, m, 5);
  const SensingOperator op(plan, Domain::momentum);
  std::vector<double> x(256, 0.2);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) x[i * 16 + j] = 1.0;
  std::vector<double> y(m);
  op.apply(x, y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tv_min(y, op, 16, 16, {}).signal.data());
  }
}
BENCHMARK(BM_TvMin)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
