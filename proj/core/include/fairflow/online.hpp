#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/instance.hpp"
#include "fairflow/rng.hpp"

namespace fairflow {

enum class PolicyKind { Random, GreedyMin, Doc4Food, MinDelta, RoundRobin };

PolicyKind policy_from_name(const std::string& name);  // throws InvalidParameter
std::string policy_name(PolicyKind kind);
const std::vector<PolicyKind>& all_policies();

// A point of the metric graph: either a node, or `offset` distance units
// along the edge (edge_u, edge_v) measured from edge_u.
struct Position {
  NodeId node = -1;
  NodeId edge_u = -1;
  NodeId edge_v = -1;
  double offset = 0.0;

  bool at_node() const { return node >= 0; }
  static Position at(NodeId v) {
    Position p;
    p.node = v;
    return p;
  }
  static Position along(NodeId u, NodeId v, double off) {
    Position p;
    p.node = -1;
    p.edge_u = u;
    p.edge_v = v;
    p.offset = off;
    return p;
  }
};

// Graph distance from a (possibly mid-edge) position to a node: the cheaper
// of backtracking to edge_u or continuing to edge_v.
double position_dist(const MetricSpace& ms, const Position& p, NodeId target);

struct NearestSource {
  Dist dist = 0;
  NodeId target = -1;
};

// Per-node nearest member of `sources` (lowest node id on distance ties).
std::vector<NearestSource> nearest_source_table(const MetricSpace& ms,
                                                const std::vector<NodeId>& sources);

// Nearest source seen from an arbitrary position, as (distance, target).
// Mid-edge, the cheaper side wins; exact ties prefer the side whose target
// has the lower id, then the edge_u side.
std::pair<double, NodeId> nearest_from(const MetricSpace& ms,
                                       const std::vector<NearestSource>& table,
                                       const Position& p);

// Moves `pos` up to `budget` distance along shortest paths toward the
// current nearest source, re-aiming at every node crossed. Stops early on
// arrival. The nearest-source distance falls by exactly the distance moved.
void drift_toward_sources(const MetricSpace& ms, const std::vector<NearestSource>& table,
                          Position& pos, double budget);

struct ServerState {
  int id = 0;
  NodeId anchor = 0;       // node of the last completed delivery (or the start)
  Position drifted;        // idle-repositioning location (Doc4Food)
  Timestep busy_until = 0;
  NodeId pending_dest = -1;  // destination of the delivery in progress
  int64_t reward = 0;
};

// Servers that are free at `now` and can still reach the source before the
// deadline. `use_drifted` measures from the drifted position instead of the
// anchor node.
std::vector<int> eligible_servers(const Instance& inst, const std::vector<ServerState>& servers,
                                  const Request& r, Timestep now, bool use_drifted);

// Assignment rules. `eligible` is ascending and non-empty; `rewards` holds
// all k current totals. Ties break toward the lowest server id.
int pick_greedy_min(const std::vector<int>& eligible, const std::vector<int64_t>& rewards);
// Weight 2^-(reward - min eligible reward); the shift keeps weights scale-free.
int pick_random(const std::vector<int>& eligible, const std::vector<int64_t>& rewards, Rng& rng);
// Minimizes the would-be spread max-min over all servers; `gains` is the
// reward each eligible candidate would collect, aligned with `eligible`.
int pick_min_delta(const std::vector<int>& eligible, const std::vector<int64_t>& rewards,
                   const std::vector<int64_t>& gains);
// First eligible server at or after the cursor, cyclically; returns the pick
// and the advanced cursor.
std::pair<int, int> pick_round_robin(const std::vector<int>& eligible, int cursor, int k);

struct RequestOutcome {
  int request_id = 0;
  int server = -1;  // -1 = no eligible server at arrival
  Timestep assign_ts = -1;
  Timestep pickup_ts = -1;
  Timestep delivery_ts = -1;
  int64_t reward = 0;
};

struct SimulationResult {
  std::vector<ServerState> per_server;   // final states
  std::vector<int64_t> server_rewards;   // per_server[i].reward, for convenience
  std::vector<RequestOutcome> outcomes;  // aligned with instance request order
  int unserved = 0;
  int64_t total_reward = 0;
  // Doc4Food only: (server, arrival) pairs whose eligibility verdict from the
  // drifted position differed from the anchor's.
  int64_t divergence = 0;
  // NDJSON, one event per line, sorted by timestamp, when enabled. Events:
  // arrive, assign, unserved, pickup, deliver, drift.
  std::string trace;
};

// Discrete-time simulation. Each timestep: finished deliveries release their
// servers at the delivery node, requests arriving now are assigned (or
// permanently dropped when nobody can make the deadline), then idle servers
// drift one step toward the nearest request source (Doc4Food only).
// Rewards count the full anchor-to-source-to-destination distance.
SimulationResult simulate(const Instance& inst, PolicyKind policy, uint64_t seed,
                          bool enable_trace = false);

}  // namespace fairflow
