#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/metric.hpp"

namespace fairflow {

using Timestep = int64_t;

// One pickup-and-deliver request: reach `source` inside [t_begin, t_end],
// then carry to `dest`. Times are discrete timesteps.
struct Request {
  int id = 0;
  NodeId source = 0;
  NodeId dest = 0;
  Timestep t_begin = 0;
  Timestep t_end = 0;
};

// A complete problem instance: the metric, the request sequence (sorted by
// arrival), the fleet and its start locations, and the time discretization.
// `eta` is the physical duration of one timestep and `speed` the distance
// covered per time unit, so one timestep covers speed*eta distance units.
struct Instance {
  MetricSpace metric;
  std::vector<Request> requests;
  int k = 1;
  std::vector<NodeId> initial_positions;
  double eta = 1.0;
  Timestep horizon = 0;
  double speed = 1.0;
  std::vector<NodeId> source_set;  // distinct request sources, ascending

  double step_distance() const { return speed * eta; }

  // Timesteps needed to cover `d` distance units, rounded up.
  Timestep steps_for_distance(double d) const {
    if (d <= 0) return 0;
    return static_cast<Timestep>(std::ceil(d / step_distance() - 1e-12));
  }
  Timestep travel_steps(NodeId u, NodeId v) const {
    return steps_for_distance(static_cast<double>(metric.dist(u, v)));
  }

  void refresh_source_set();
};

struct Violation {
  int request_id = -1;  // -1 for instance-level problems
  std::string reason;
};

// Returns every invariant violation found (empty means the instance is valid).
std::vector<Violation> validate(const Instance& inst);

// Random workload on an existing metric: n requests with distinct arrival
// timesteps and distinct deadlines, window length (deadline - arrival) drawn
// uniformly from prep_range, endpoints uniform with source != dest, and k
// uniform start positions. Tuples that would overrun the horizon are redrawn;
// RangeExhausted is thrown when that cannot succeed.
Instance gen_synthetic(const MetricSpace& metric, int n_requests, Timestep horizon,
                       std::pair<Timestep, Timestep> arrival_range,
                       std::pair<Timestep, Timestep> prep_range, int k, uint64_t seed);

// Star workload: all k servers start at the hub and request j asks for a
// delivery from the hub to leaf j. Windows are long enough for any server to
// come back to the hub and are spaced 2*max(d)+slack timesteps apart, so any
// subset of requests can be served by one server in arrival order.
Instance gen_partition_instance(const std::vector<Dist>& d_values, int k, Timestep slack);

// Versioned JSON document (see README for the schema). Unknown fields are
// rejected; a missing "speed" defaults to 1 and appends a note to *warnings.
void save_instance(const Instance& inst, std::ostream& out);
Instance load_instance(std::istream& in, std::vector<std::string>* warnings = nullptr);
void save_instance_file(const Instance& inst, const std::string& path);
Instance load_instance_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

// CSV ingestion: header `order_id,source_node,dest_node,arrival_ts,
// pickup_deadline_ts`, one request per row. Orders whose arrival collides
// with an earlier one are shifted forward (whole window) until arrivals are
// pairwise distinct. The horizon defaults to the latest possible completion.
Instance ingest_csv(std::istream& in, const MetricSpace& metric, int k,
                    std::vector<NodeId> initial_positions, double eta, double speed,
                    std::optional<Timestep> horizon = std::nullopt,
                    std::vector<std::string>* warnings = nullptr);

}  // namespace fairflow
