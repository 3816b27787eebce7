#include <benchmark/benchmark.h>

#include <random>

#include "meg/likelihood.hpp"
#include "meg/score.hpp"
#include "meg/simulate.hpp"

using namespace meg;

namespace {

EventLog uniform_log(const GraphShape& shape, std::size_t m, double horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(0.0, horizon);
  std::uniform_int_distribution<NodeId> src(0, static_cast<NodeId>(shape.sources() - 1));
  std::uniform_int_distribution<NodeId> dst(0, static_cast<NodeId>(shape.destinations() - 1));
  EventLog log;
  log.horizon = horizon;
  for (std::size_t k = 0; k < m; ++k) {
    NodeId i = src(rng), j = dst(rng);
    while (j == i) j = dst(rng);
    log.events.push_back({time(rng), i, j});
  }
  std::sort(log.events.begin(), log.events.end(),
            [](const Event& a, const Event& b) { return a.time < b.time; });
  return log;
}

Params stable_params(const GraphShape& shape, const ModelSpec& spec, double scale) {
  Params p = Params::filled(shape, spec, 0.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for_each_block(p, [&](std::string_view name, std::vector<double>& values) {
    const bool offset = name.find("offset") != std::string_view::npos;
    for (double& v : values) v = offset ? u(rng) : scale * u(rng);
  });
  return p;
}

const ModelSpec kSpec{Memory::hawkes, Memory::hawkes, 2, TauStrategy::mle};

void BM_LikelihoodGradient(benchmark::State& state) {
  const auto shape = GraphShape::directed(20);
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto log = uniform_log(shape, m, static_cast<double>(m) / 10.0, 1);
  const auto index = build_event_index(log, shape);
  const auto tau = estimate_tau(index, kSpec.tau);
  const ModelContext ctx(index, tau, kSpec);
  const Params p = stable_params(shape, kSpec, 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_likelihood(p, ctx, state.range(1) != 0));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}
BENCHMARK(BM_LikelihoodGradient)
    ->ArgsProduct({{10'000, 100'000, 1'000'000}, {0, 1}})
    ->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto shape = GraphShape::directed(10);
  const auto m = static_cast<std::size_t>(state.range(0));
  const Params p = stable_params(shape, kSpec, 0.01);
  TauMatrix tau(shape, 0.0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    SimConfig cfg{0.0, seed++, 0, 10'000'000};
    benchmark::DoNotOptimize(simulate_n_events(p, tau, kSpec, shape, m, cfg));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}
BENCHMARK(BM_Simulate)->Arg(1'000)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_ScoreInSample(benchmark::State& state) {
  const auto shape = GraphShape::directed(20);
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto log = uniform_log(shape, m, static_cast<double>(m) / 10.0, 2);
  const Params p = stable_params(shape, kSpec, 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_in_sample(p, kSpec, shape, log));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}
BENCHMARK(BM_ScoreInSample)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
