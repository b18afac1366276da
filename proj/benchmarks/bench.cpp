#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "cmvno/controller.hpp"
#include "cmvno/harness.hpp"
#include "cmvno/power.hpp"
#include "cmvno/selection.hpp"

namespace {

using namespace cmvno;

double rayleigh(std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0 / (2.0 * 4.5 * 4.5));
  return std::sqrt(e(rng)) + 1e-9;
}

void BM_Waterfill(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<WeightedChannel> ch;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    ch.push_back({static_cast<std::size_t>(i), 0.5 + 0.5 * std::uniform_real_distribution<>()(rng), rayleigh(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(waterfill(ch, 8.0));
}
BENCHMARK(BM_Waterfill)->Arg(4)->Arg(16)->Arg(32);

SelectionInstance instance(std::size_t leasing, std::size_t sensing) {
  std::mt19937_64 rng(2);
  SelectionInstance inst;
  inst.menu = {{0.0, 0.5, 0.5}, {0.1, 0.1, 0.08}, {0.5, 0.008, 0.005}};
  inst.p_max = 8.0;
  inst.tradeoff = 100.0;
  inst.backlog = 150.0;
  for (std::size_t i = 0; i < leasing; ++i) inst.leasing.push_back({rayleigh(rng), 1.0});
  for (std::size_t j = 0; j < sensing; ++j) inst.sensing.push_back({rayleigh(rng), 50.0 * static_cast<double>(j), 0.001, 0.6});
  return inst;
}

void BM_Selection(benchmark::State& state) {
  const auto inst = instance(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_sensing_and_channels(inst));
}
BENCHMARK(BM_Selection)->Args({6, 6})->Args({12, 20});

void BM_Assignment(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto n = static_cast<std::size_t>(state.range(0));
  GainMatrix gains(n, 2);
  std::vector<double> weights(n, 0.9);
  for (double& g : gains.data) g = rayleigh(rng);
  const std::vector<double> backlogs = {120.0, 80.0};
  for (auto _ : state) benchmark::DoNotOptimize(assign_and_waterfill(backlogs, gains, weights, 8.0));
}
BENCHMARK(BM_Assignment)->Arg(8)->Arg(32);

void BM_Step(benchmark::State& state, const char* preset) {
  auto policy = make_preset(preset).policy;
  Simulation sim(policy, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sim.step());
}
BENCHMARK_CAPTURE(BM_Step, pmc, "s7-pmc");
BENCHMARK_CAPTURE(BM_Step, mpmc_2q, "s7-mpmc-2q");
BENCHMARK_CAPTURE(BM_Step, markov, "markov-demo");

}  // namespace
BENCHMARK_MAIN();
