#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/errors.hpp"

namespace fairflow {

using NodeId = int32_t;
using Dist = int64_t;

struct WeightedEdge {
  NodeId u = 0;
  NodeId v = 0;
  Dist w = 0;
};

// A finite metric space derived from a connected, undirected, positively
// weighted graph. Distances are exact shortest-path lengths (64-bit integers,
// no floating point), and next_hop stores the first node after `u` on one
// deterministic shortest path from `u` to `v`, which lets callers walk whole
// paths without re-running any search.
class MetricSpace {
 public:
  MetricSpace() = default;

  // Runs one single-source shortest-path pass per node (array-based Dijkstra,
  // O(m^2 + E) per source). Throws InvalidEdge for bad endpoints, self loops
  // or non-positive weights, and DisconnectedGraph if any pair is unreachable.
  static MetricSpace build(int node_count, std::vector<WeightedEdge> edges);

  int node_count() const { return node_count_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }

  Dist dist(NodeId u, NodeId v) const { return dist_[idx(u, v)]; }
  NodeId next_hop(NodeId u, NodeId v) const { return next_hop_[idx(u, v)]; }

  // (total distance, node sequence u..v along one shortest path).
  std::pair<Dist, std::vector<NodeId>> shortest_path(NodeId u, NodeId v) const;

  Dist diameter() const;

  // Graph file format: {"nodes": m, "edges": [[u, v, w], ...]}.
  static MetricSpace from_json(const std::string& text);
  std::string to_json() const;

 private:
  size_t idx(NodeId u, NodeId v) const {
    check_node(u);
    check_node(v);
    return static_cast<size_t>(u) * node_count_ + v;
  }
  void check_node(NodeId x) const {
    if (x < 0 || x >= node_count_) throw InvalidParameter("node id out of range");
  }

  int node_count_ = 0;
  std::vector<WeightedEdge> edges_;
  std::vector<Dist> dist_;
  std::vector<NodeId> next_hop_;
};

// Erdos-Renyi G(n, p) with integer weights drawn uniformly from
// [w_lo, w_hi]. If the sample is disconnected, uniformly random edges between
// distinct components are added (weight drawn from the same range) until the
// graph is connected. Deterministic for a fixed seed.
MetricSpace gen_erdos_renyi(int n, double p, Dist w_lo, Dist w_hi, uint64_t seed);

// Star graph: node 0 is the hub, leaf j+1 sits at distance leaf_distances[j].
MetricSpace gen_star(const std::vector<Dist>& leaf_distances);

}  // namespace fairflow
