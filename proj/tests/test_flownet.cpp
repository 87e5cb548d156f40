#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "fairflow/flownet.hpp"
#include "support/generators.hpp"

using namespace fairflow;
using fairflow::testsupport::make_fuzz_instance;
using fairflow::testsupport::make_window_rich_instance;

namespace {

using EdgeTuple = std::tuple<int, int, Dist, int, int>;  // from, to, cost, kind, request

EdgeTuple as_tuple(const TEEdge& e) {
  return {e.from, e.to, e.cost, static_cast<int>(e.kind), e.request_id};
}

// Enumerates the expected edge multiset from first principles, using only the
// documented node numbering.
std::vector<EdgeTuple> expected_edges(const Instance& inst) {
  const int m = inst.metric.node_count();
  const Timestep T = inst.horizon;
  auto grid = [&](NodeId loc, Timestep t) {
    return 2 + static_cast<int>(loc) * static_cast<int>(T + 1) + static_cast<int>(t);
  };
  auto pickup = [&](int j) { return 2 + m * static_cast<int>(T + 1) + j; };
  auto steps = [&](NodeId a, NodeId b) {
    const double d = static_cast<double>(inst.metric.dist(a, b));
    if (d <= 0) return Timestep{0};
    return static_cast<Timestep>(std::ceil(d / (inst.speed * inst.eta) - 1e-12));
  };

  std::vector<EdgeTuple> out;
  for (NodeId i = 0; i < m; ++i)
    out.push_back({0, grid(i, 0), 0, static_cast<int>(TEEdgeKind::SourceLink), -1});
  for (NodeId i = 0; i < m; ++i)
    for (Timestep t = 0; t < T; ++t)
      out.push_back({grid(i, t), grid(i, t + 1), 0, static_cast<int>(TEEdgeKind::Self), -1});
  for (NodeId i = 0; i < m; ++i)
    out.push_back({grid(i, T), 1, 0, static_cast<int>(TEEdgeKind::SinkLink), -1});
  for (size_t j = 0; j < inst.requests.size(); ++j) {
    const Request& r = inst.requests[j];
    for (NodeId h = 0; h < m; ++h) {
      const Timestep travel = steps(h, r.source);
      if (travel > r.t_end - r.t_begin) continue;
      out.push_back({grid(h, r.t_end - travel), pickup(static_cast<int>(j)),
                     inst.metric.dist(h, r.source), static_cast<int>(TEEdgeKind::Approach),
                     static_cast<int>(j)});
    }
    out.push_back({pickup(static_cast<int>(j)),
                   grid(r.dest, r.t_end + steps(r.source, r.dest)),
                   inst.metric.dist(r.source, r.dest), static_cast<int>(TEEdgeKind::Delivery),
                   static_cast<int>(j)});
  }
  return out;
}

Instance path_instance() {
  // 0 --2-- 1 --3-- 2, one request from 1 to 2.
  Instance inst;
  inst.metric = MetricSpace::build(3, {{0, 1, 2}, {1, 2, 3}});
  inst.k = 1;
  inst.initial_positions = {0};
  inst.requests = {{0, 1, 2, 2, 6}};
  inst.horizon = 9;
  inst.refresh_source_set();
  return inst;
}

}  // namespace

TEST_CASE("edge set matches an independent enumeration on random instances") {
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    Instance inst = make_fuzz_instance(seed);
    TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
    std::vector<EdgeTuple> got;
    for (const auto& e : net.edges()) got.push_back(as_tuple(e));
    std::vector<EdgeTuple> want = expected_edges(inst);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got == want);
  }
  for (uint64_t seed = 100; seed < 110; ++seed) {
    Instance inst = make_window_rich_instance(seed);
    TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
    std::vector<EdgeTuple> got;
    for (const auto& e : net.edges()) got.push_back(as_tuple(e));
    std::vector<EdgeTuple> want = expected_edges(inst);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    REQUIRE(got == want);
  }
}

TEST_CASE("node layout: one grid node per location-timestep plus pickups") {
  Instance inst = path_instance();
  inst.horizon = 9;
  TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
  CHECK(net.nodes().size() == 2u + 3u * 10u + 1u);

  // Worked size example: 3 locations, horizon 4, one request -> 18 nodes.
  Instance tiny = path_instance();
  tiny.requests[0].t_begin = 0;
  tiny.requests[0].t_end = 1;
  tiny.horizon = 4;
  TimeExpandedNetwork small = TimeExpandedNetwork::build(tiny);
  CHECK(small.nodes().size() == 18u);

  for (NodeId i = 0; i < 3; ++i) {
    for (Timestep t = 0; t <= 9; ++t) {
      const TENode& nd = net.nodes()[net.grid_node(i, t)];
      CHECK(nd.kind == TENodeKind::Grid);
      CHECK(nd.location == i);
      CHECK(nd.timestep == t);
    }
  }
  const TENode& p = net.nodes()[net.pickup_node(0)];
  CHECK(p.kind == TENodeKind::Pickup);
  CHECK(p.location == 1);
  CHECK(p.timestep == 6);
  CHECK(p.request_id == 0);
  CHECK(net.nodes()[net.source_node()].kind == TENodeKind::Source);
  CHECK(net.nodes()[net.sink_node()].kind == TENodeKind::Sink);
  CHECK_THROWS_AS(net.grid_node(3, 0), InvalidParameter);
  CHECK_THROWS_AS(net.grid_node(0, 10), InvalidParameter);
  CHECK_THROWS_AS(net.pickup_node(1), InvalidParameter);
}

TEST_CASE("approach edges: latest feasible departure, in-window pruning") {
  Instance inst = path_instance();  // request 1 -> 2, window [2, 6], dists 2/3/5
  TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);

  int approaches = 0;
  for (const auto& e : net.edges()) {
    if (e.kind != TEEdgeKind::Approach) continue;
    ++approaches;
    const TENode& from = net.nodes()[e.from];
    if (from.location == 1) {
      CHECK(e.cost == 0);
      CHECK(from.timestep == 6);
    } else if (from.location == 0) {
      CHECK(e.cost == 2);
      CHECK(from.timestep == 4);  // departs at 6 - travel(2)
    } else {
      CHECK(e.cost == 3);
      CHECK(from.timestep == 3);
    }
    CHECK(net.nodes()[e.to].kind == TENodeKind::Pickup);
  }
  CHECK(approaches == 3);

  // Shrink the window to 2: location 2 (travel 3) no longer fits.
  Instance tight = path_instance();
  tight.requests[0].t_begin = 4;
  TimeExpandedNetwork net2 = TimeExpandedNetwork::build(tight);
  int count2 = 0;
  for (const auto& e : net2.edges())
    if (e.kind == TEEdgeKind::Approach) ++count2;
  CHECK(count2 == 2);
}

TEST_CASE("delivery edge index points at the unique delivery edge") {
  Instance inst = make_fuzz_instance(5);
  TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
  for (size_t j = 0; j < inst.requests.size(); ++j) {
    const TEEdge& e = net.edges()[net.delivery_edge(static_cast<int>(j))];
    CHECK(e.kind == TEEdgeKind::Delivery);
    CHECK(e.request_id == static_cast<int>(j));
    CHECK(e.from == net.pickup_node(static_cast<int>(j)));
    const Request& r = inst.requests[j];
    CHECK(e.cost == inst.metric.dist(r.source, r.dest));
    CHECK(e.to == net.grid_node(r.dest, r.t_end + inst.travel_steps(r.source, r.dest)));
  }
}

TEST_CASE("adjacency lists agree with the edge array") {
  Instance inst = make_fuzz_instance(9);
  TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
  size_t out_total = 0, in_total = 0;
  for (size_t v = 0; v < net.nodes().size(); ++v) {
    for (int e : net.out_edges()[v]) CHECK(net.edges()[e].from == static_cast<int>(v));
    for (int e : net.in_edges()[v]) CHECK(net.edges()[e].to == static_cast<int>(v));
    out_total += net.out_edges()[v].size();
    in_total += net.in_edges()[v].size();
  }
  CHECK(out_total == net.edges().size());
  CHECK(in_total == net.edges().size());
}

TEST_CASE("speed scaling and the strict travel-time gate") {
  Instance inst = path_instance();  // dists 2, 3, 5
  inst.speed = 2.0;
  // dist 3 / speed 2 = 1.5 timesteps: rejected when strict, rounded up otherwise.
  CHECK_THROWS_AS(TimeExpandedNetwork::build(inst, true), NonIntegralTravelTime);
  TimeExpandedNetwork lenient = TimeExpandedNetwork::build(inst, false);
  CHECK(lenient.instance().travel_steps(1, 2) == 2);

  Instance even;
  even.metric = gen_star({2, 4});
  even.k = 1;
  even.initial_positions = {0};
  even.requests = {{0, 1, 2, 0, 8}};
  even.horizon = 12;
  even.speed = 2.0;
  even.refresh_source_set();
  TimeExpandedNetwork strict = TimeExpandedNetwork::build(even, true);
  CHECK(strict.instance().travel_steps(1, 2) == 3);  // distance 6 at speed 2
  CHECK(validate_network(strict).empty());
}

TEST_CASE("deliveries past the horizon are rejected at build time") {
  Instance inst = path_instance();
  inst.horizon = 8;  // request needs t_end 6 + travel 3 = 9
  CHECK_THROWS_AS(TimeExpandedNetwork::build(inst), HorizonOverflow);
  inst.horizon = 9;
  CHECK_NOTHROW(TimeExpandedNetwork::build(inst));
}

TEST_CASE("structural validator is clean on generated instances") {
  for (uint64_t seed = 31; seed <= 50; ++seed) {
    Instance inst = make_fuzz_instance(seed);
    TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
    auto problems = validate_network(net);
    if (!problems.empty()) {
      for (const auto& p : problems) MESSAGE(p);
    }
    CHECK(problems.empty());
  }
}

TEST_CASE("dot dump mentions every node") {
  Instance inst = path_instance();
  TimeExpandedNetwork net = TimeExpandedNetwork::build(inst);
  std::string dot = to_dot(net);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("p0@6") != std::string::npos);
  CHECK(dot.find("g2@9") != std::string::npos);
}
