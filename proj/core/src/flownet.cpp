#include "fairflow/flownet.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace fairflow {

int TimeExpandedNetwork::grid_node(NodeId location, Timestep t) const {
  const int m = instance_->metric.node_count();
  if (location < 0 || location >= m || t < 0 || t > horizon_)
    throw InvalidParameter("grid_node: location/timestep out of range");
  return 2 + static_cast<int>(location) * static_cast<int>(horizon_ + 1) +
         static_cast<int>(t);
}

int TimeExpandedNetwork::pickup_node(int request_index) const {
  if (request_index < 0 || request_index >= static_cast<int>(instance_->requests.size()))
    throw InvalidParameter("pickup_node: request index out of range");
  return 2 + instance_->metric.node_count() * static_cast<int>(horizon_ + 1) + request_index;
}

TimeExpandedNetwork TimeExpandedNetwork::build(const Instance& inst, bool strict_travel) {
  TimeExpandedNetwork net;
  net.instance_ = &inst;
  net.horizon_ = inst.horizon;
  const int m = inst.metric.node_count();
  const int n = static_cast<int>(inst.requests.size());
  const Timestep T = inst.horizon;

  auto steps_checked = [&](NodeId a, NodeId b) {
    const double ratio = static_cast<double>(inst.metric.dist(a, b)) / inst.step_distance();
    if (strict_travel && std::abs(ratio - std::round(ratio)) > 1e-9)
      throw NonIntegralTravelTime("travel time between " + std::to_string(a) + " and " +
                                  std::to_string(b) + " is not a whole number of timesteps");
    return inst.travel_steps(a, b);
  };

  net.nodes_.reserve(2 + static_cast<size_t>(m) * (T + 1) + n);
  net.nodes_.push_back({TENodeKind::Source, -1, -1, -1});
  net.nodes_.push_back({TENodeKind::Sink, -1, -1, -1});
  for (NodeId i = 0; i < m; ++i)
    for (Timestep t = 0; t <= T; ++t)
      net.nodes_.push_back({TENodeKind::Grid, i, t, -1});
  for (int j = 0; j < n; ++j)
    net.nodes_.push_back({TENodeKind::Pickup, inst.requests[j].source,
                          inst.requests[j].t_end, j});

  auto add_edge = [&](int from, int to, Dist cost, TEEdgeKind kind, int req) {
    net.edges_.push_back({from, to, cost, kind, req});
  };

  for (NodeId i = 0; i < m; ++i)
    add_edge(net.source_node(), net.grid_node(i, 0), 0, TEEdgeKind::SourceLink, -1);
  for (NodeId i = 0; i < m; ++i)
    for (Timestep t = 0; t < T; ++t)
      add_edge(net.grid_node(i, t), net.grid_node(i, t + 1), 0, TEEdgeKind::Self, -1);
  for (NodeId i = 0; i < m; ++i)
    add_edge(net.grid_node(i, T), net.sink_node(), 0, TEEdgeKind::SinkLink, -1);

  net.delivery_edge_.assign(n, -1);
  for (int j = 0; j < n; ++j) {
    const Request& r = inst.requests[j];
    const Timestep window = r.t_end - r.t_begin;
    for (NodeId h = 0; h < m; ++h) {
      if (h == r.source) {
        // A server already waiting at the source boards at the deadline.
        add_edge(net.grid_node(r.source, r.t_end), net.pickup_node(j), 0,
                 TEEdgeKind::Approach, j);
        continue;
      }
      const Timestep travel = steps_checked(h, r.source);
      if (travel > window) continue;  // cannot depart inside the window and arrive in time
      add_edge(net.grid_node(h, r.t_end - travel), net.pickup_node(j),
               inst.metric.dist(h, r.source), TEEdgeKind::Approach, j);
    }
    const Timestep dtravel = steps_checked(r.source, r.dest);
    if (r.t_end + dtravel > T)
      throw HorizonOverflow("request " + std::to_string(r.id) +
                            ": delivery lands past the horizon");
    net.delivery_edge_[j] = static_cast<int>(net.edges_.size());
    add_edge(net.pickup_node(j), net.grid_node(r.dest, r.t_end + dtravel),
             inst.metric.dist(r.source, r.dest), TEEdgeKind::Delivery, j);
  }

  net.out_edges_.assign(net.nodes_.size(), {});
  net.in_edges_.assign(net.nodes_.size(), {});
  for (size_t e = 0; e < net.edges_.size(); ++e) {
    net.out_edges_[net.edges_[e].from].push_back(static_cast<int>(e));
    net.in_edges_[net.edges_[e].to].push_back(static_cast<int>(e));
  }
  return net;
}

std::vector<std::string> validate_network(const TimeExpandedNetwork& net) {
  std::vector<std::string> out;
  const Instance& inst = net.instance();
  const int m = inst.metric.node_count();
  const int n = static_cast<int>(inst.requests.size());
  const Timestep T = inst.horizon;

  const size_t expected_nodes = 2 + static_cast<size_t>(m) * (T + 1) + n;
  if (net.nodes().size() != expected_nodes)
    out.push_back("node count " + std::to_string(net.nodes().size()) +
                  " does not match the construction size " + std::to_string(expected_nodes));
  const size_t edge_bound = static_cast<size_t>(m) * (T + n + 2) + n;
  if (net.edges().size() > edge_bound)
    out.push_back("edge count exceeds the construction bound");

  // Timestep order: -1 is reserved for Source (before everything); the sink
  // is treated as after everything.
  auto from_ts = [&](const TEEdge& e) {
    const TENode& a = net.nodes()[e.from];
    return a.kind == TENodeKind::Source ? static_cast<Timestep>(-1) : a.timestep;
  };
  auto to_ts = [&](const TEEdge& e) {
    const TENode& b = net.nodes()[e.to];
    return b.kind == TENodeKind::Sink ? T + 1 : b.timestep;
  };

  std::map<std::pair<int, NodeId>, int> approach_per_origin;
  std::vector<int> deliveries_per_pickup(n, 0);

  for (const auto& e : net.edges()) {
    if (from_ts(e) > to_ts(e))
      out.push_back("edge goes backwards in time");
    switch (e.kind) {
      case TEEdgeKind::SourceLink:
      case TEEdgeKind::SinkLink:
      case TEEdgeKind::Self:
        if (e.cost != 0) out.push_back("zero-cost edge family carries nonzero cost");
        break;
      case TEEdgeKind::Approach: {
        const TENode& a = net.nodes()[e.from];
        const TENode& b = net.nodes()[e.to];
        if (b.kind != TENodeKind::Pickup || e.request_id < 0) {
          out.push_back("approach edge does not end at a pickup node");
          break;
        }
        const Request& r = inst.requests[e.request_id];
        if (e.cost != inst.metric.dist(a.location, r.source))
          out.push_back("approach cost is not the shortest-path distance");
        const Timestep travel = inst.travel_steps(a.location, r.source);
        if (a.timestep + travel != r.t_end)
          out.push_back("approach departure does not arrive exactly at the deadline");
        if (a.timestep < r.t_begin)
          out.push_back("approach departs before the window opens");
        auto key = std::make_pair(e.request_id, a.location);
        if (++approach_per_origin[key] > 1)
          out.push_back("more than one approach edge for one (origin, request) pair");
        break;
      }
      case TEEdgeKind::Delivery: {
        const TENode& a = net.nodes()[e.from];
        const TENode& b = net.nodes()[e.to];
        if (a.kind != TENodeKind::Pickup || e.request_id < 0) {
          out.push_back("delivery edge does not start at a pickup node");
          break;
        }
        const Request& r = inst.requests[e.request_id];
        if (e.cost != inst.metric.dist(r.source, r.dest))
          out.push_back("delivery cost is not the source-dest distance");
        if (b.location != r.dest ||
            b.timestep != r.t_end + inst.travel_steps(r.source, r.dest))
          out.push_back("delivery edge lands at the wrong grid node");
        ++deliveries_per_pickup[e.request_id];
        break;
      }
    }
  }
  for (int j = 0; j < n; ++j) {
    if (deliveries_per_pickup[j] != 1)
      out.push_back("pickup node " + std::to_string(j) + " must have exactly one delivery");
  }
  return out;
}

std::string to_dot(const TimeExpandedNetwork& net) {
  std::ostringstream os;
  os << "digraph flownet {\n  rankdir=LR;\n";
  for (size_t i = 0; i < net.nodes().size(); ++i) {
    const TENode& nd = net.nodes()[i];
    os << "  n" << i << " [label=\"";
    switch (nd.kind) {
      case TENodeKind::Source: os << "source"; break;
      case TENodeKind::Sink: os << "sink"; break;
      case TENodeKind::Grid: os << "g" << nd.location << "@" << nd.timestep; break;
      case TENodeKind::Pickup: os << "p" << nd.request_id << "@" << nd.timestep; break;
    }
    os << "\"];\n";
  }
  for (const auto& e : net.edges()) {
    os << "  n" << e.from << " -> n" << e.to;
    if (e.cost != 0) os << " [label=\"" << e.cost << "\"]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace fairflow
