// Serial reference against the OpenMP kernel for the three hot loops.
#include "codedmec/bandwidth.hpp"
#include "codedmec/config.hpp"
#include "codedmec/harness.hpp"
#include "codedmec/opt_compute.hpp"

#include <benchmark/benchmark.h>

using namespace codedmec;

namespace {

struct Desk {
  ScenarioConfig cfg;
  Scenario s;
  SampleSet samples;
  CacheDecision cache;
  ComputeDecision x;

  explicit Desk(std::size_t samples_count) {
    cfg.num_samples = samples_count;
    s = build_scenario(cfg);
    samples = build_samples(cfg, s);
    std::vector<std::uint8_t> c(s.num_tasks, 0);
    c[0] = c[1] = c[2] = 1;
    cache = derive_t(c, DataType::Input, s);
    x = ComputeDecision(s.num_devices, s.num_tasks);
    for (DeviceIndex k = 0; k < s.num_devices; ++k) {
      if (deadline_feasible(s, k, k % s.num_tasks)) x.set(k, k % s.num_tasks, true);
    }
  }
};

template <bool Parallel>
void average(benchmark::State& state) {
  const Desk d(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? average_bandwidth(d.s, d.cache, d.x, d.samples)
                                      : average_bandwidth_serial(d.s, d.cache, d.x, d.samples));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void copies(benchmark::State& state) {
  const Desk d(static_cast<std::size_t>(state.range(0)));
  const SolverParams params;
  const P2Data data = make_p2_data(d.s, d.samples);
  const AdmmState start = initial_state(data, params);
  for (auto _ : state) {
    AdmmState st = start;
    if constexpr (Parallel) {
      update_copies(st, data, params);
    } else {
      update_copies_serial(st, data, params);
    }
    benchmark::DoNotOptimize(st.y.data());
  }
}

template <bool Parallel>
void brute(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.num_devices = 2;
  cfg.num_tasks = 6;
  cfg.num_samples = 50;
  const Scenario s = build_scenario(cfg);
  const SampleSet samples = build_samples(cfg, s);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? brute_force_joint(s, samples).bandwidth
                                      : brute_force_joint_serial(s, samples).bandwidth);
  }
}

}  // namespace

BENCHMARK(average<false>)->Name("average_bandwidth/serial")->Arg(1000)->Arg(20000);
BENCHMARK(average<true>)->Name("average_bandwidth/omp")->Arg(1000)->Arg(20000);
BENCHMARK(copies<false>)->Name("update_copies/serial")->Arg(200);
BENCHMARK(copies<true>)->Name("update_copies/omp")->Arg(200);
BENCHMARK(brute<false>)->Name("brute_force_joint/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(brute<true>)->Name("brute_force_joint/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
