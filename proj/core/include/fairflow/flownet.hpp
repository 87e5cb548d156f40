#pragma once

#include <string>
#include <vector>

#include "fairflow/instance.hpp"

namespace fairflow {

enum class TENodeKind { Source, Sink, Grid, Pickup };
enum class TEEdgeKind { SourceLink, SinkLink, Self, Approach, Delivery };

struct TENode {
  TENodeKind kind = TENodeKind::Grid;
  NodeId location = -1;   // metric node for Grid/Pickup, -1 otherwise
  Timestep timestep = -1; // grid time for Grid, deadline for Pickup, -1 otherwise
  int request_id = -1;    // request index for Pickup, -1 otherwise
};

struct TEEdge {
  int from = 0;
  int to = 0;
  Dist cost = 0;
  TEEdgeKind kind = TEEdgeKind::Self;
  int request_id = -1;  // request index for Approach/Delivery edges
};

// Time-expanded routing graph. One grid node per (location, timestep), one
// dedicated pickup node per request, a super source feeding timestep 0 and a
// super sink draining timestep T. Movement between locations happens only on
// request edges:
//
//   Approach  Grid(h, t_end - travel(h, source)) -> Pickup(j), cost dist(h, source),
//             present only when travel(h, source) fits inside the window; the
//             departure is the latest one that still reaches the source by the
//             deadline, which subsumes every earlier departure at equal cost.
//             The origin h == source contributes the zero-cost edge from
//             Grid(source, t_end).
//   Delivery  Pickup(j) -> Grid(dest, t_end + travel(source, dest)), cost
//             dist(source, dest); exactly one per pickup node.
//
// Self edges (wait in place) and source/sink links carry zero cost.
class TimeExpandedNetwork {
 public:
  // Travel times in timesteps are ceil(dist/(speed*eta)). With strict_travel
  // any non-integral ratio raises NonIntegralTravelTime instead of rounding
  // up. Deliveries that would land past the horizon raise HorizonOverflow.
  // The network keeps a pointer to `inst`, which must outlive it.
  static TimeExpandedNetwork build(const Instance& inst, bool strict_travel = false);

  const Instance& instance() const { return *instance_; }
  const std::vector<TENode>& nodes() const { return nodes_; }
  const std::vector<TEEdge>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& out_edges() const { return out_edges_; }
  const std::vector<std::vector<int>>& in_edges() const { return in_edges_; }

  int source_node() const { return 0; }
  int sink_node() const { return 1; }
  int grid_node(NodeId location, Timestep t) const;
  int pickup_node(int request_index) const;
  int delivery_edge(int request_index) const { return delivery_edge_[request_index]; }

 private:
  const Instance* instance_ = nullptr;
  Timestep horizon_ = 0;
  std::vector<TENode> nodes_;
  std::vector<TEEdge> edges_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<std::vector<int>> in_edges_;
  std::vector<int> delivery_edge_;
};

// Structural checks (edge families, costs, timing rule, size bounds).
// Returns human-readable violations; empty means the network is sound.
std::vector<std::string> validate_network(const TimeExpandedNetwork& net);

// Graphviz dump for eyeballing small networks.
std::string to_dot(const TimeExpandedNetwork& net);

}  // namespace fairflow
