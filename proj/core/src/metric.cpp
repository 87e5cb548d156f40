#include "fairflow/metric.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

#include "fairflow/rng.hpp"

namespace fairflow {

namespace {
constexpr Dist kInf = std::numeric_limits<Dist>::max() / 4;
}

MetricSpace MetricSpace::build(int node_count, std::vector<WeightedEdge> edges) {
  if (node_count < 1) throw InvalidParameter("node_count must be >= 1");
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= node_count || e.v < 0 || e.v >= node_count)
      throw InvalidEdge("edge endpoint out of range");
    if (e.u == e.v) throw InvalidEdge("self loops are not allowed");
    if (e.w <= 0) throw InvalidEdge("edge weights must be strictly positive");
  }

  const int m = node_count;
  std::vector<std::vector<std::pair<NodeId, Dist>>> adj(m);
  for (const auto& e : edges) {
    adj[e.u].push_back({e.v, e.w});
    adj[e.v].push_back({e.u, e.w});
  }

  MetricSpace ms;
  ms.node_count_ = m;
  ms.edges_ = std::move(edges);
  ms.dist_.assign(static_cast<size_t>(m) * m, kInf);
  ms.next_hop_.assign(static_cast<size_t>(m) * m, -1);

  std::vector<char> done(m);
  for (NodeId s = 0; s < m; ++s) {
    Dist* d = &ms.dist_[static_cast<size_t>(s) * m];
    NodeId* hop = &ms.next_hop_[static_cast<size_t>(s) * m];
    std::fill(done.begin(), done.end(), 0);
    d[s] = 0;
    hop[s] = s;
    for (int round = 0; round < m; ++round) {
      NodeId u = -1;
      Dist best = kInf;
      for (NodeId x = 0; x < m; ++x) {
        if (!done[x] && d[x] < best) {
          best = d[x];
          u = x;
        }
      }
      if (u < 0) break;
      done[u] = 1;
      for (const auto& [v, w] : adj[u]) {
        if (d[u] + w < d[v]) {
          d[v] = d[u] + w;
          hop[v] = (u == s) ? v : hop[u];
        }
      }
    }
    for (NodeId v = 0; v < m; ++v) {
      if (d[v] >= kInf) throw DisconnectedGraph("graph is not connected");
    }
  }
  return ms;
}

std::pair<Dist, std::vector<NodeId>> MetricSpace::shortest_path(NodeId u, NodeId v) const {
  std::vector<NodeId> path{u};
  NodeId cur = u;
  int steps = 0;
  while (cur != v) {
    cur = next_hop(cur, v);
    path.push_back(cur);
    if (++steps > node_count_) throw NumericalFailure("next_hop chain does not terminate");
  }
  return {dist(u, v), path};
}

Dist MetricSpace::diameter() const {
  Dist best = 0;
  for (Dist d : dist_) best = std::max(best, d);
  return best;
}

MetricSpace MetricSpace::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("graph json: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("graph json: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "nodes" && key != "edges")
      throw ParseError("graph json: unknown field '" + key + "'");
  }
  if (!j.contains("nodes") || !j["nodes"].is_number_integer())
    throw ParseError("graph json: missing integer field 'nodes'");
  if (!j.contains("edges") || !j["edges"].is_array())
    throw ParseError("graph json: missing array field 'edges'");
  const int m = j["nodes"].get<int>();
  std::vector<WeightedEdge> edges;
  for (const auto& item : j["edges"]) {
    if (!item.is_array() || item.size() != 3 || !item[0].is_number_integer() ||
        !item[1].is_number_integer() || !item[2].is_number_integer())
      throw ParseError("graph json: each edge must be [u, v, w] with integers");
    edges.push_back({item[0].get<NodeId>(), item[1].get<NodeId>(), item[2].get<Dist>()});
  }
  return build(m, std::move(edges));
}

std::string MetricSpace::to_json() const {
  nlohmann::ordered_json j;
  j["nodes"] = node_count_;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : edges_) arr.push_back({e.u, e.v, e.w});
  j["edges"] = std::move(arr);
  return j.dump();
}

MetricSpace gen_erdos_renyi(int n, double p, Dist w_lo, Dist w_hi, uint64_t seed) {
  if (n < 1) throw InvalidParameter("gen_erdos_renyi: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("gen_erdos_renyi: p must be in [0, 1]");
  if (w_lo <= 0 || w_lo > w_hi) throw InvalidParameter("gen_erdos_renyi: bad weight range");

  Rng rng(seed);
  std::vector<WeightedEdge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.uniform01() < p) {
        edges.push_back({u, v, rng.uniform_int(w_lo, w_hi)});
      }
    }
  }

  // Union-find over the sampled edges; bridge distinct components with
  // uniformly random cross pairs until one component remains.
  std::vector<NodeId> parent(n);
  for (NodeId i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](NodeId x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  int components = n;
  auto unite = [&](NodeId a, NodeId b) {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  };
  for (const auto& e : edges) unite(e.u, e.v);
  while (components > 1) {
    NodeId u = static_cast<NodeId>(rng.below(static_cast<uint64_t>(n)));
    NodeId v = static_cast<NodeId>(rng.below(static_cast<uint64_t>(n)));
    if (u == v || find(u) == find(v)) continue;
    edges.push_back({std::min(u, v), std::max(u, v), rng.uniform_int(w_lo, w_hi)});
    unite(u, v);
  }

  return MetricSpace::build(n, std::move(edges));
}

MetricSpace gen_star(const std::vector<Dist>& leaf_distances) {
  if (leaf_distances.empty()) throw EmptyInput("gen_star: need at least one leaf");
  std::vector<WeightedEdge> edges;
  for (size_t j = 0; j < leaf_distances.size(); ++j) {
    edges.push_back({0, static_cast<NodeId>(j + 1), leaf_distances[j]});
  }
  return MetricSpace::build(static_cast<int>(leaf_distances.size()) + 1, std::move(edges));
}

}  // namespace fairflow
