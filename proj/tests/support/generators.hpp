#pragma once

// Shared instance generators for tests.
//
// make_window_rich_instance builds instances on small complete graphs with
// edge weights in {1, 2} (so the graph diameter is at most 2), windows at
// least as long as the diameter, and deadlines spaced at least two diameters
// apart. On such instances a server that is free anywhere in the graph can
// always reach the next source inside its window, whether it departs as soon
// as it is free or at the last possible moment — so the exhaustive-search
// and flow-model service disciplines admit exactly the same schedules at
// identical rewards, which is what offline dominance checks rely on.
//
// make_fuzz_instance builds unconstrained random instances for simulation
// invariant tests: any connected graph, any feasible windows.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "fairflow/instance.hpp"
#include "fairflow/metric.hpp"
#include "fairflow/rng.hpp"

namespace fairflow::testsupport {

inline MetricSpace make_small_complete_graph(int m, Rng& rng) {
  std::vector<WeightedEdge> edges;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v)
      edges.push_back({u, v, static_cast<Dist>(rng.uniform_int(1, 2))});
  return MetricSpace::build(m, edges);
}

struct WindowRichParams {
  int min_nodes = 3, max_nodes = 5;
  int min_requests = 1, max_requests = 5;
  int min_servers = 1, max_servers = 2;
};

inline Instance make_window_rich_instance(uint64_t seed, const WindowRichParams& p = {}) {
  Rng rng(seed);
  const int m = static_cast<int>(rng.uniform_int(p.min_nodes, p.max_nodes));
  Instance inst;
  inst.metric = make_small_complete_graph(m, rng);
  const Dist diam = inst.metric.diameter();

  const int n = static_cast<int>(rng.uniform_int(p.min_requests, p.max_requests));
  const int k = static_cast<int>(rng.uniform_int(p.min_servers, p.max_servers));
  inst.k = k;
  for (int i = 0; i < k; ++i)
    inst.initial_positions.push_back(static_cast<NodeId>(rng.uniform_int(0, m - 1)));

  Timestep t_end = diam + 3;
  for (int j = 0; j < n; ++j) {
    Request r;
    r.id = j;
    r.source = static_cast<NodeId>(rng.uniform_int(0, m - 1));
    do {
      r.dest = static_cast<NodeId>(rng.uniform_int(0, m - 1));
    } while (r.dest == r.source);
    Timestep window = diam + rng.uniform_int(0, 2);
    r.t_end = t_end;
    r.t_begin = t_end - window;
    inst.requests.push_back(r);
    // Window lengths differ by at most 2, so a gap of 2*diam + 2 between
    // consecutive deadlines keeps both deadlines and arrivals strictly
    // increasing while preserving the reach-any-source-in-window property.
    t_end += 2 * diam + 2 + rng.uniform_int(0, 1);
  }
  inst.horizon = inst.requests.back().t_end + diam;
  inst.refresh_source_set();
  return inst;
}

inline Instance make_fuzz_instance(uint64_t seed) {
  Rng rng(seed);
  const int m = static_cast<int>(rng.uniform_int(4, 12));
  MetricSpace ms = gen_erdos_renyi(m, 0.5, 1, 20, rng.next_u64());

  Instance inst;
  inst.metric = ms;
  inst.k = static_cast<int>(rng.uniform_int(1, 5));
  for (int i = 0; i < inst.k; ++i)
    inst.initial_positions.push_back(static_cast<NodeId>(rng.uniform_int(0, m - 1)));
  const double speeds[] = {0.5, 1.0, 2.0, 3.0};
  inst.speed = speeds[rng.below(4)];
  inst.eta = 1.0;

  const int n = static_cast<int>(rng.uniform_int(1, 10));
  std::vector<Timestep> arrivals;
  while (static_cast<int>(arrivals.size()) < n) {
    Timestep t = rng.uniform_int(0, 120);
    if (std::find(arrivals.begin(), arrivals.end(), t) == arrivals.end()) arrivals.push_back(t);
  }
  std::sort(arrivals.begin(), arrivals.end());

  Timestep max_done = 0;
  std::vector<Timestep> deadlines_seen;
  for (int j = 0; j < n; ++j) {
    Request r;
    r.id = j;
    r.source = static_cast<NodeId>(rng.uniform_int(0, m - 1));
    do {
      r.dest = static_cast<NodeId>(rng.uniform_int(0, m - 1));
    } while (r.dest == r.source);
    r.t_begin = arrivals[j];
    Timestep w;
    do {
      w = rng.uniform_int(1, 40);
    } while (std::find(deadlines_seen.begin(), deadlines_seen.end(), r.t_begin + w) !=
             deadlines_seen.end());
    r.t_end = r.t_begin + w;
    deadlines_seen.push_back(r.t_end);
    max_done = std::max(max_done, r.t_end + inst.travel_steps(r.source, r.dest));
    inst.requests.push_back(r);
  }
  inst.horizon = max_done + rng.uniform_int(0, 10);
  inst.refresh_source_set();
  return inst;
}

}  // namespace fairflow::testsupport
