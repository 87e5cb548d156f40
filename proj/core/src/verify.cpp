#include "fairflow/verify.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "fairflow/errors.hpp"

namespace fairflow {

namespace {

void bump(ResidualReport& rep, const std::string& family, double residual,
          const std::string& detail) {
  double r = std::fabs(residual);
  auto [it, inserted] = rep.family_max.try_emplace(family, r);
  if (!inserted && r > it->second) it->second = r;
  if (r > rep.max_residual) {
    rep.max_residual = r;
    rep.worst_detail = family + ": " + detail;
  }
}

std::string istr(int64_t v) { return std::to_string(v); }

}  // namespace

ResidualReport verify_solution(const TimeExpandedNetwork& net, const ModelSpec& spec,
                               const Solution& sol) {
  const Instance& inst = net.instance();
  const auto& edges = net.edges();
  const auto& nodes = net.nodes();
  const int num_edges = static_cast<int>(edges.size());
  const int n = static_cast<int>(inst.requests.size());
  const bool maxmin = spec.objective == MilpObjective::MaxMin;
  const int spe = maxmin ? spec.k : 1;

  ResidualReport rep;
  if (static_cast<int>(sol.flows.size()) != num_edges * spe)
    throw InvalidParameter("verify: flow vector size does not match the network");
  if (static_cast<int>(sol.z.size()) != n)
    throw InvalidParameter("verify: z vector size does not match the request count");

  auto flow = [&](int e, int s) { return sol.flows[static_cast<size_t>(e) * spe + s]; };

  const double flow_cap = maxmin ? 1.0 : static_cast<double>(spec.k);
  for (int e = 0; e < num_edges; ++e) {
    for (int s = 0; s < spe; ++s) {
      double f = flow(e, s);
      if (f < 0.0) bump(rep, "bounds", -f, "edge " + istr(e) + " server " + istr(s) + " below 0");
      if (f > flow_cap)
        bump(rep, "bounds", f - flow_cap, "edge " + istr(e) + " server " + istr(s) + " above cap");
    }
  }
  for (int j = 0; j < n; ++j) {
    if (sol.z[j] != 0 && sol.z[j] != 1)
      bump(rep, "bounds", 1.0, "z of request " + istr(j) + " not binary");
  }

  // Start pinning under Fixed mode, expressed on the source-link edges.
  if (spec.initial_mode == InitialMode::Fixed) {
    if (static_cast<int>(inst.initial_positions.size()) != spec.k)
      throw InvalidParameter("verify: fixed mode needs one start position per server");
    std::map<NodeId, double> want;
    for (NodeId p : inst.initial_positions) want[p] += 1.0;
    std::map<NodeId, std::vector<double>> got;  // per-server source-link flow by location
    for (int e = 0; e < num_edges; ++e) {
      if (edges[e].kind != TEEdgeKind::SourceLink) continue;
      NodeId loc = nodes[edges[e].to].location;
      auto& v = got[loc];
      v.assign(spe, 0.0);
      for (int s = 0; s < spe; ++s) v[s] = flow(e, s);
    }
    if (maxmin) {
      for (auto& [loc, per_server] : got) {
        for (int s = 0; s < spe; ++s) {
          bool is_start = inst.initial_positions[s] == loc;
          double f = per_server[s];
          double want_f = is_start ? 1.0 : 0.0;
          if (std::fabs(f - want_f) > 0.0)
            bump(rep, "start", f - want_f,
                 "server " + istr(s) + " source link at location " + istr(loc));
        }
      }
    } else {
      for (auto& [loc, per_server] : got) {
        double expect = 0.0;
        if (auto it = want.find(loc); it != want.end()) expect = it->second;
        bump(rep, "start", per_server[0] - expect, "source link at location " + istr(loc));
      }
    }
  }

  // Per-server rewards recomputed straight from edge costs.
  if (maxmin) {
    if (static_cast<int>(sol.rewards.size()) != spec.k)
      throw InvalidParameter("verify: reward vector size does not match k");
    std::vector<double> recomputed(spec.k, 0.0);
    for (int e = 0; e < num_edges; ++e) {
      if (edges[e].cost == 0) continue;
      for (int s = 0; s < spe; ++s)
        recomputed[s] += static_cast<double>(edges[e].cost) * flow(e, s);
    }
    for (int s = 0; s < spec.k; ++s) {
      bump(rep, "reward", recomputed[s] - sol.rewards[s], "reward of server " + istr(s));
      double below = sol.min_reward - recomputed[s];
      if (below > 0.0)
        bump(rep, "reward_floor", below, "minimum reward above server " + istr(s));
    }
  }

  // Pickup capacity and serve-or-drop, one pickup node per request.
  std::vector<double> delivery_flow(n, 0.0);
  for (int j = 0; j < n; ++j) {
    int pu = net.pickup_node(j);
    double in_total = 0.0;
    for (int e : net.in_edges()[pu])
      for (int s = 0; s < spe; ++s) in_total += flow(e, s);
    if (in_total > 1.0) bump(rep, "pickup", in_total - 1.0, "pickup inflow of request " + istr(j));
    int de = net.delivery_edge(j);
    double out_total = 0.0;
    for (int s = 0; s < spe; ++s) out_total += flow(de, s);
    delivery_flow[j] = out_total;
    bump(rep, "serve", sol.z[j] + out_total - 1.0, "serve-or-drop of request " + istr(j));
  }

  // Flow conservation per server on every interior node.
  const int num_nodes = static_cast<int>(nodes.size());
  for (int v = 0; v < num_nodes; ++v) {
    if (v == net.source_node() || v == net.sink_node()) continue;
    for (int s = 0; s < spe; ++s) {
      double bal = 0.0;
      for (int e : net.out_edges()[v]) bal += flow(e, s);
      for (int e : net.in_edges()[v]) bal -= flow(e, s);
      if (bal != 0.0)
        bump(rep, "balance", bal, "node " + istr(v) + " server " + istr(s));
    }
  }

  // Fleet size: k out of the source, k into the sink.
  double src_out = 0.0, snk_in = 0.0;
  for (int e : net.out_edges()[net.source_node()])
    for (int s = 0; s < spe; ++s) src_out += flow(e, s);
  for (int e : net.in_edges()[net.sink_node()])
    for (int s = 0; s < spe; ++s) snk_in += flow(e, s);
  bump(rep, "fleet", src_out - spec.k, "total flow out of the source");
  bump(rep, "fleet", snk_in - spec.k, "total flow into the sink");

  // Optional two-sided reward cap.
  if (spec.alpha && maxmin) {
    double alpha = *spec.alpha;
    double reward_total = 0.0;
    for (int e = 0; e < num_edges; ++e) {
      if (edges[e].cost == 0) continue;
      for (int s = 0; s < spe; ++s)
        reward_total += static_cast<double>(edges[e].cost) * flow(e, s);
    }
    if (spec.alpha_form == TwoSidedForm::Prose) {
      double served_value = 0.0;
      for (int j = 0; j < n; ++j) {
        double c = static_cast<double>(edges[net.delivery_edge(j)].cost);
        served_value += c * delivery_flow[j];
      }
      double over = reward_total - alpha * served_value;
      if (over > 0.0) bump(rep, "reward_cap", over, "total reward above the cap");
    } else {
      for (int j = 0; j < n; ++j) {
        double over = reward_total - alpha * delivery_flow[j];
        if (over > 0.0)
          bump(rep, "reward_cap", over, "total reward above the cap of request " + istr(j));
      }
    }
  }

  // Objective recomputation. MaxMin: min reward minus drop penalties.
  // MinCost: movement cost plus drop penalties.
  double obj;
  double drops = 0.0;
  for (int j = 0; j < n; ++j) drops += sol.z[j];
  if (maxmin) {
    obj = sol.min_reward - spec.penalty * drops;
  } else {
    double cost = 0.0;
    for (int e = 0; e < num_edges; ++e)
      cost += static_cast<double>(edges[e].cost) * flow(e, 0);
    obj = cost + spec.penalty * drops;
  }
  bump(rep, "objective", obj - sol.objective_value, "objective recomputation");

  return rep;
}

}  // namespace fairflow
