#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairflow/online.hpp"
#include "support/generators.hpp"

using namespace fairflow;
using fairflow::testsupport::make_fuzz_instance;

namespace {

Instance abc_instance(Timestep t_begin, Timestep t_end) {
  // 0 --2-- 1 --3-- 2, server at node 0, one request from 1 to 2.
  Instance inst;
  inst.metric = MetricSpace::build(3, {{0, 1, 2}, {1, 2, 3}});
  inst.k = 1;
  inst.initial_positions = {0};
  inst.requests = {{0, 1, 2, t_begin, t_end}};
  inst.horizon = t_end + 3;
  inst.refresh_source_set();
  return inst;
}

}  // namespace

TEST_CASE("policy names round trip") {
  CHECK(all_policies().size() == 5u);
  for (PolicyKind kind : all_policies()) CHECK(policy_from_name(policy_name(kind)) == kind);
  CHECK_THROWS_AS(policy_from_name("Greedy"), InvalidParameter);
}

TEST_CASE("greedy-min picks the poorest eligible server, lowest id on ties") {
  CHECK(pick_greedy_min({0, 1, 2}, {5, 3, 3}) == 1);
  CHECK(pick_greedy_min({0, 2}, {5, 0, 5}) == 0);
  CHECK(pick_greedy_min({1}, {5, 9}) == 1);
}

TEST_CASE("randomized rule: halving weights per reward unit above the minimum") {
  // Rewards (0, 1): weights (1, 1/2) -> probabilities (2/3, 1/3).
  Rng rng(12345);
  int first = 0;
  const int trials = 30000;
  for (int t = 0; t < trials; ++t)
    if (pick_random({0, 1}, {0, 1}, rng) == 0) ++first;
  const double share = static_cast<double>(first) / trials;
  CHECK(share == doctest::Approx(2.0 / 3.0).epsilon(0.03));

  // Adding a constant to every reward cannot change the distribution: the
  // exact pick sequence matches draw by draw.
  Rng a(9), b(9);
  for (int t = 0; t < 2000; ++t) {
    int pa = pick_random({0, 1, 2}, {5, 6, 7}, a);
    int pb = pick_random({0, 1, 2}, {1005, 1006, 1007}, b);
    CHECK(pa == pb);
  }

  Rng c(7);
  CHECK(pick_random({1}, {3, 8}, c) == 1);
}

TEST_CASE("min-delta rule minimizes the hypothetical reward spread") {
  // Rewards (5, 1, 9), both 0 and 1 eligible, each would gain 4: assigning
  // to server 1 leaves spread 9-5=4, assigning to 0 leaves 9-1=8.
  CHECK(pick_min_delta({0, 1}, {5, 1, 9}, {4, 4}) == 1);
  // Distinct gains can reverse the verdict.
  CHECK(pick_min_delta({0, 1}, {5, 1, 9}, {1, 20}) == 0);
  CHECK(pick_min_delta({0}, {5, 1, 9}, {4}) == 0);
  CHECK_THROWS_AS(pick_min_delta({0, 1}, {1, 1}, {4}), InvalidParameter);
}

TEST_CASE("round-robin rule: first eligible at or after the cursor, cyclic") {
  CHECK(pick_round_robin({0, 2}, 1, 3) == std::pair<int, int>(2, 0));
  CHECK(pick_round_robin({0}, 2, 3) == std::pair<int, int>(0, 1));
  CHECK(pick_round_robin({0, 1, 2}, 0, 3) == std::pair<int, int>(0, 1));
  CHECK(pick_round_robin({1}, 1, 4) == std::pair<int, int>(1, 2));
}

TEST_CASE("eligibility: free in time to reach the source before the deadline") {
  Instance inst = abc_instance(0, 5);
  std::vector<ServerState> servers(1);
  servers[0].id = 0;
  servers[0].anchor = 0;  // distance 2 from the source
  servers[0].drifted = Position::at(0);

  CHECK(eligible_servers(inst, servers, inst.requests[0], 0, false) == std::vector<int>{0});

  servers[0].busy_until = 3;
  CHECK(eligible_servers(inst, servers, inst.requests[0], 0, false).empty());
  servers[0].busy_until = 0;

  // Distance 3 against window 5 fits; distance 6 does not.
  Instance far;
  far.metric = gen_star({3, 6});
  far.k = 2;
  far.initial_positions = {1, 2};
  far.requests = {{0, 0, 1, 0, 5}};
  far.horizon = 10;
  far.refresh_source_set();
  std::vector<ServerState> pair(2);
  for (int i = 0; i < 2; ++i) {
    pair[i].id = i;
    pair[i].anchor = far.initial_positions[i];
    pair[i].drifted = Position::at(pair[i].anchor);
  }
  CHECK(eligible_servers(far, pair, far.requests[0], 0, false) == std::vector<int>{0});

  // From the drifted position the far server gets close enough.
  pair[1].drifted = Position::along(0, 2, 1.0);  // 5 units from node 0... 1 from hub
  CHECK(eligible_servers(far, pair, far.requests[0], 0, true) == std::vector<int>{0, 1});
}

TEST_CASE("position distance on nodes and mid-edge points") {
  MetricSpace ms = MetricSpace::build(3, {{0, 1, 3}, {1, 2, 4}});
  CHECK(position_dist(ms, Position::at(0), 2) == doctest::Approx(7.0));
  CHECK(position_dist(ms, Position::along(0, 1, 1.0), 1) == doctest::Approx(2.0));
  CHECK(position_dist(ms, Position::along(0, 1, 1.0), 0) == doctest::Approx(1.0));
  // From a point inside (1,2), going back through 1 can still win.
  CHECK(position_dist(ms, Position::along(1, 2, 1.0), 0) == doctest::Approx(4.0));
}

TEST_CASE("nearest-source table and queries prefer lower node ids on ties") {
  MetricSpace ms = gen_star({2, 2});
  auto table = nearest_source_table(ms, {1, 2});
  CHECK(table[0].dist == 2);
  CHECK(table[0].target == 1);  // tie between leaves 1 and 2
  CHECK(table[1].dist == 0);
  CHECK(table[2].target == 2);

  auto [d, target] = nearest_from(ms, table, Position::along(0, 1, 1.0));
  CHECK(d == doctest::Approx(1.0));
  CHECK(target == 1);
  CHECK_THROWS_AS(nearest_source_table(ms, {}), EmptyInput);
}

TEST_CASE("drift walks toward the nearest source and stops there") {
  // Path 0-1-2-3-4 with unit edges, single source at 4.
  MetricSpace ms = MetricSpace::build(
      5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  auto table = nearest_source_table(ms, {4});
  Position p = Position::at(0);
  for (int step = 1; step <= 4; ++step) {
    drift_toward_sources(ms, table, p, 1.0);
    CHECK(nearest_from(ms, table, p).first == doctest::Approx(4.0 - step));
  }
  CHECK(p.at_node());
  CHECK(p.node == 4);
  drift_toward_sources(ms, table, p, 1.0);  // already there: fixed point
  CHECK(p.node == 4);

  // Mid-edge point on a weight-3 edge, nearer side is the far endpoint.
  MetricSpace line = MetricSpace::build(2, {{0, 1, 3}});
  auto t2 = nearest_source_table(line, {1});
  Position q = Position::along(0, 1, 1.0);
  drift_toward_sources(line, t2, q, 1.0);
  REQUIRE(!q.at_node());
  CHECK(q.offset == doctest::Approx(2.0));
  drift_toward_sources(line, t2, q, 1.0);
  CHECK(q.at_node());
  CHECK(q.node == 1);
}

TEST_CASE("drift shrinks the nearest-source distance by exactly the budget") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    MetricSpace ms = gen_erdos_renyi(10, 0.3, 1, 9, seed * 13);
    std::vector<NodeId> sources;
    for (NodeId v = 0; v < 10; ++v)
      if (rng.below(3) == 0) sources.push_back(v);
    if (sources.empty()) sources.push_back(static_cast<NodeId>(rng.below(10)));
    auto table = nearest_source_table(ms, sources);

    for (int trial = 0; trial < 20; ++trial) {
      Position p;
      if (rng.below(2) == 0) {
        p = Position::at(static_cast<NodeId>(rng.below(10)));
      } else {
        const auto& e = ms.edges()[rng.below(ms.edges().size())];
        p = Position::along(e.u, e.v, rng.uniform01() * static_cast<double>(e.w));
      }
      const double before = nearest_from(ms, table, p).first;
      const double budget = rng.uniform01() * 3.0;
      drift_toward_sources(ms, table, p, budget);
      const double after = nearest_from(ms, table, p).first;
      CHECK(after == doctest::Approx(std::max(0.0, before - budget)).epsilon(1e-6));
    }
  }
}

TEST_CASE("simulation: single request is picked up on time and paid in full") {
  Instance inst = abc_instance(0, 5);
  SimulationResult res = simulate(inst, PolicyKind::GreedyMin, 1);
  CHECK(res.unserved == 0);
  REQUIRE(res.outcomes.size() == 1u);
  CHECK(res.outcomes[0].server == 0);
  CHECK(res.outcomes[0].pickup_ts == 2);    // travel 2 from node 0
  CHECK(res.outcomes[0].delivery_ts == 5);  // plus travel 3 to the destination
  CHECK(res.outcomes[0].reward == 5);
  CHECK(res.server_rewards == std::vector<int64_t>{5});
  CHECK(res.total_reward == 5);
  CHECK(res.per_server[0].anchor == 2);  // released at the destination

  Instance tight = abc_instance(0, 1);  // window shorter than the approach
  SimulationResult miss = simulate(tight, PolicyKind::GreedyMin, 1);
  CHECK(miss.unserved == 1);
  CHECK(miss.outcomes[0].server == -1);
  CHECK(miss.total_reward == 0);
}

TEST_CASE("simulation: pickup clamps into the request window") {
  // The server is already at the source when the window opens later.
  Instance inst = abc_instance(4, 9);
  inst.initial_positions = {1};
  SimulationResult res = simulate(inst, PolicyKind::GreedyMin, 1);
  CHECK(res.outcomes[0].pickup_ts == 4);  // waits for t_begin
  CHECK(res.outcomes[0].delivery_ts == 7);
  CHECK(res.outcomes[0].reward == 3);
}

TEST_CASE("simulation: greedy-min spreads work across two servers") {
  Instance inst = gen_partition_instance({2, 2}, 2, 0);
  SimulationResult res = simulate(inst, PolicyKind::GreedyMin, 1);
  CHECK(res.unserved == 0);
  CHECK(res.server_rewards == std::vector<int64_t>{2, 2});

  SimulationResult rr = simulate(inst, PolicyKind::RoundRobin, 1);
  CHECK(rr.server_rewards == std::vector<int64_t>{2, 2});
}

TEST_CASE("doc4food: drifted eligibility, anchor rewards, divergence counter") {
  Instance inst;
  inst.metric = MetricSpace::build(3, {{0, 1, 6}, {1, 2, 4}});
  inst.k = 1;
  inst.initial_positions = {0};
  inst.requests = {{0, 1, 2, 3, 8}};
  inst.horizon = 12;
  inst.refresh_source_set();

  // The anchor is 6 away (3 + 6 > 8: ineligible), but three drift steps put
  // the roamer 3 away, inside the window. The reward still counts the full
  // anchor-to-source leg.
  SimulationResult doc = simulate(inst, PolicyKind::Doc4Food, 1);
  CHECK(doc.unserved == 0);
  CHECK(doc.outcomes[0].pickup_ts == 6);
  CHECK(doc.outcomes[0].delivery_ts == 10);
  CHECK(doc.outcomes[0].reward == 10);
  CHECK(doc.divergence == 1);

  SimulationResult greedy = simulate(inst, PolicyKind::GreedyMin, 1);
  CHECK(greedy.unserved == 1);
  CHECK(greedy.divergence == 0);
}

TEST_CASE("doc4food trace records drift steps; other policies never drift") {
  Instance inst = abc_instance(4, 9);  // source 1, server at node 0
  SimulationResult doc = simulate(inst, PolicyKind::Doc4Food, 1, true);
  CHECK(doc.trace.find("\"drift\"") != std::string::npos);

  SimulationResult greedy = simulate(inst, PolicyKind::GreedyMin, 1, true);
  CHECK(greedy.trace.find("\"drift\"") == std::string::npos);

  // Drift moves the roamer toward the source ahead of the arrival, so the
  // pickup happens as soon as the window opens.
  CHECK(doc.outcomes[0].pickup_ts == 4);
  CHECK(doc.outcomes[0].reward == 5);
}

TEST_CASE("trace: one json object per line, sorted, complete") {
  Instance inst = gen_partition_instance({1, 2, 3}, 2, 0);
  SimulationResult res = simulate(inst, PolicyKind::GreedyMin, 3, true);
  REQUIRE(!res.trace.empty());

  std::istringstream lines(res.trace);
  std::string line;
  Timestep prev = -1;
  std::map<std::string, int> counts;
  while (std::getline(lines, line)) {
    nlohmann::json j = nlohmann::json::parse(line);  // throws on malformed lines
    REQUIRE(j.contains("ts"));
    REQUIRE(j.contains("event"));
    Timestep ts = j["ts"].get<Timestep>();
    CHECK(ts >= prev);
    prev = ts;
    ++counts[j["event"].get<std::string>()];
  }
  CHECK(counts["arrive"] == 3);
  CHECK(counts["assign"] == 3 - res.unserved);
  CHECK(counts["pickup"] == counts["assign"]);
  CHECK(counts["deliver"] == counts["assign"]);
  CHECK(counts["unserved"] == res.unserved);

  // Tracing must not change the outcome.
  SimulationResult plain = simulate(inst, PolicyKind::GreedyMin, 3, false);
  CHECK(plain.trace.empty());
  CHECK(plain.server_rewards == res.server_rewards);
}

TEST_CASE("simulation invariants hold across policies on fuzzed instances") {
  for (uint64_t seed = 60; seed < 80; ++seed) {
    Instance inst = make_fuzz_instance(seed);
    for (PolicyKind policy : all_policies()) {
      SimulationResult res = simulate(inst, policy, seed, true);
      SimulationResult again = simulate(inst, policy, seed, true);

      // Deterministic replay, including the trace bytes.
      CHECK(again.server_rewards == res.server_rewards);
      CHECK(again.unserved == res.unserved);
      CHECK(again.divergence == res.divergence);
      CHECK(again.trace == res.trace);

      // Reward conservation, with every reward recomputed from a replay of
      // the per-server anchor chain (initial position, then each delivery).
      int64_t sum_servers = 0;
      for (int64_t r : res.server_rewards) sum_servers += r;
      int64_t sum_outcomes = 0;
      int unserved = 0;
      std::vector<NodeId> anchor(inst.initial_positions);
      for (size_t i = 0; i < res.outcomes.size(); ++i) {
        const RequestOutcome& oc = res.outcomes[i];
        const Request& r = inst.requests[i];
        if (oc.server < 0) {
          ++unserved;
          continue;
        }
        sum_outcomes += oc.reward;
        CHECK(oc.assign_ts == r.t_begin);
        CHECK(oc.pickup_ts >= r.t_begin);
        CHECK(oc.pickup_ts <= r.t_end);
        CHECK(oc.delivery_ts == oc.pickup_ts + inst.travel_steps(r.source, r.dest));
        CHECK(oc.delivery_ts <= inst.horizon);
        CHECK(oc.reward == inst.metric.dist(anchor[oc.server], r.source) +
                               inst.metric.dist(r.source, r.dest));
        anchor[oc.server] = r.dest;
      }
      CHECK(sum_servers == res.total_reward);
      CHECK(sum_outcomes == res.total_reward);
      CHECK(unserved == res.unserved);

      // Busy intervals never overlap per server.
      std::map<int, std::vector<std::pair<Timestep, Timestep>>> spans;
      for (const RequestOutcome& oc : res.outcomes)
        if (oc.server >= 0) spans[oc.server].push_back({oc.assign_ts, oc.delivery_ts});
      for (auto& [server, list] : spans) {
        std::sort(list.begin(), list.end());
        for (size_t i = 0; i + 1 < list.size(); ++i) CHECK(list[i].second <= list[i + 1].first);
      }

      if (policy != PolicyKind::Doc4Food) CHECK(res.divergence == 0);
    }
  }
}
