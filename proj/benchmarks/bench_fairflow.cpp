#include <benchmark/benchmark.h>

#include "fairflow/flownet.hpp"
#include "fairflow/instance.hpp"
#include "fairflow/metric.hpp"
#include "fairflow/milp.hpp"
#include "fairflow/online.hpp"
#include "fairflow/solve.hpp"

namespace {

using namespace fairflow;

// Graph generation is dominated by the all-pairs shortest path pass.
void BM_MetricBuild(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    MetricSpace ms = gen_erdos_renyi(m, 0.3, 1, 100, 7);
    benchmark::DoNotOptimize(ms.dist(0, m - 1));
  }
  state.SetComplexityN(m);
}
BENCHMARK(BM_MetricBuild)->Arg(64)->Arg(128)->Arg(256)->Complexity(benchmark::oNCubed);

void BM_NetworkBuild(benchmark::State& state) {
  MetricSpace ms = gen_erdos_renyi(30, 0.3, 1, 10, 11);
  Instance inst = gen_synthetic(ms, static_cast<int>(state.range(0)), 400, {0, 350}, {20, 60},
                                5, 13);
  for (auto _ : state) {
    TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
    benchmark::DoNotOptimize(net.edges().size());
  }
}
BENCHMARK(BM_NetworkBuild)->Arg(10)->Arg(40);

void BM_Simulate(benchmark::State& state) {
  MetricSpace ms = gen_erdos_renyi(100, 0.2, 1, 50, 17);
  Instance inst = gen_synthetic(ms, 50, 600, {0, 500}, {10, 80}, 10, 19);
  const PolicyKind kind = state.range(0) == 0 ? PolicyKind::GreedyMin : PolicyKind::Doc4Food;
  for (auto _ : state) {
    SimulationResult sim = simulate(inst, kind, 1);
    benchmark::DoNotOptimize(sim.total_reward);
  }
}
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1);

void BM_EmbeddedSolve(benchmark::State& state) {
  Instance inst = gen_partition_instance({1, 2, 3}, 2, 0);
  TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
  ModelSpec spec;
  spec.k = inst.k;
  spec.penalty = default_penalty(inst);
  for (auto _ : state) {
    MilpModel model = build_flow_milp(net, spec);
    Solution sol = solve_embedded(model);
    benchmark::DoNotOptimize(sol.objective_value);
  }
}
BENCHMARK(BM_EmbeddedSolve);

}  // namespace

BENCHMARK_MAIN();
