#include "fairflow/online.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "fairflow/errors.hpp"

namespace fairflow {

PolicyKind policy_from_name(const std::string& name) {
  if (name == "Random") return PolicyKind::Random;
  if (name == "GreedyMin") return PolicyKind::GreedyMin;
  if (name == "Doc4Food") return PolicyKind::Doc4Food;
  if (name == "MinDelta") return PolicyKind::MinDelta;
  if (name == "RoundRobin") return PolicyKind::RoundRobin;
  throw InvalidParameter("unknown policy '" + name +
                         "' (expected Random, GreedyMin, Doc4Food, MinDelta or RoundRobin)");
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Random: return "Random";
    case PolicyKind::GreedyMin: return "GreedyMin";
    case PolicyKind::Doc4Food: return "Doc4Food";
    case PolicyKind::MinDelta: return "MinDelta";
    case PolicyKind::RoundRobin: return "RoundRobin";
  }
  throw InvalidParameter("unknown policy kind");
}

const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> kAll = {PolicyKind::Random, PolicyKind::GreedyMin,
                                               PolicyKind::Doc4Food, PolicyKind::MinDelta,
                                               PolicyKind::RoundRobin};
  return kAll;
}

double position_dist(const MetricSpace& ms, const Position& p, NodeId target) {
  if (p.at_node()) return static_cast<double>(ms.dist(p.node, target));
  double len = static_cast<double>(ms.dist(p.edge_u, p.edge_v));
  double via_u = p.offset + static_cast<double>(ms.dist(p.edge_u, target));
  double via_v = (len - p.offset) + static_cast<double>(ms.dist(p.edge_v, target));
  return std::min(via_u, via_v);
}

std::vector<NearestSource> nearest_source_table(const MetricSpace& ms,
                                                const std::vector<NodeId>& sources) {
  if (sources.empty()) throw EmptyInput("nearest_source_table: no source nodes");
  std::vector<NearestSource> table(ms.node_count());
  for (NodeId v = 0; v < ms.node_count(); ++v) {
    NearestSource best{std::numeric_limits<Dist>::max(), -1};
    for (NodeId s : sources) {
      Dist d = ms.dist(v, s);
      if (d < best.dist || (d == best.dist && s < best.target)) best = {d, s};
    }
    table[v] = best;
  }
  return table;
}

std::pair<double, NodeId> nearest_from(const MetricSpace& ms,
                                       const std::vector<NearestSource>& table,
                                       const Position& p) {
  if (p.at_node()) return {static_cast<double>(table[p.node].dist), table[p.node].target};
  double len = static_cast<double>(ms.dist(p.edge_u, p.edge_v));
  const NearestSource& nu = table[p.edge_u];
  const NearestSource& nv = table[p.edge_v];
  double via_u = p.offset + static_cast<double>(nu.dist);
  double via_v = (len - p.offset) + static_cast<double>(nv.dist);
  bool take_u;
  if (via_u < via_v) {
    take_u = true;
  } else if (via_v < via_u) {
    take_u = false;
  } else {
    take_u = nu.target <= nv.target;
  }
  return take_u ? std::make_pair(via_u, nu.target) : std::make_pair(via_v, nv.target);
}

void drift_toward_sources(const MetricSpace& ms, const std::vector<NearestSource>& table,
                          Position& pos, double budget) {
  while (budget > 1e-9) {
    if (pos.at_node()) {
      const NearestSource& ns = table[pos.node];
      if (ns.dist == 0) return;  // already on a request source
      NodeId hop = ms.next_hop(pos.node, ns.target);
      double len = static_cast<double>(ms.dist(pos.node, hop));
      if (budget >= len - 1e-9) {
        budget -= len;
        pos = Position::at(hop);
      } else {
        pos = Position::along(pos.node, hop, budget);
        return;
      }
    } else {
      double len = static_cast<double>(ms.dist(pos.edge_u, pos.edge_v));
      const NearestSource& nu = table[pos.edge_u];
      const NearestSource& nv = table[pos.edge_v];
      double via_u = pos.offset + static_cast<double>(nu.dist);
      double via_v = (len - pos.offset) + static_cast<double>(nv.dist);
      bool toward_u = via_u < via_v || (via_u == via_v && nu.target <= nv.target);
      if (toward_u) {
        if (budget >= pos.offset - 1e-9) {
          budget -= pos.offset;
          pos = Position::at(pos.edge_u);
        } else {
          pos.offset -= budget;
          return;
        }
      } else {
        double rest = len - pos.offset;
        if (budget >= rest - 1e-9) {
          budget -= rest;
          pos = Position::at(pos.edge_v);
        } else {
          pos.offset += budget;
          return;
        }
      }
    }
  }
}

std::vector<int> eligible_servers(const Instance& inst, const std::vector<ServerState>& servers,
                                  const Request& r, Timestep now, bool use_drifted) {
  std::vector<int> out;
  for (const ServerState& s : servers) {
    if (s.busy_until > now) continue;
    Position p = use_drifted ? s.drifted : Position::at(s.anchor);
    Timestep steps = inst.steps_for_distance(position_dist(inst.metric, p, r.source));
    if (now + steps <= r.t_end) out.push_back(s.id);
  }
  return out;
}

int pick_greedy_min(const std::vector<int>& eligible, const std::vector<int64_t>& rewards) {
  int best = eligible.front();
  for (int id : eligible) {
    if (rewards[id] < rewards[best]) best = id;
  }
  return best;
}

int pick_random(const std::vector<int>& eligible, const std::vector<int64_t>& rewards, Rng& rng) {
  int64_t lo = rewards[eligible.front()];
  for (int id : eligible) lo = std::min(lo, rewards[id]);
  std::vector<double> weight(eligible.size());
  double total = 0.0;
  for (size_t i = 0; i < eligible.size(); ++i) {
    double expo = static_cast<double>(rewards[eligible[i]] - lo);
    weight[i] = std::exp2(-std::min(expo, 1000.0));
    total += weight[i];
  }
  double u = rng.uniform01() * total;
  double acc = 0.0;
  for (size_t i = 0; i < eligible.size(); ++i) {
    acc += weight[i];
    if (u < acc) return eligible[i];
  }
  return eligible.back();
}

int pick_min_delta(const std::vector<int>& eligible, const std::vector<int64_t>& rewards,
                   const std::vector<int64_t>& gains) {
  if (eligible.size() != gains.size())
    throw InvalidParameter("pick_min_delta: gains must align with the eligible list");
  int best = -1;
  int64_t best_spread = 0;
  for (size_t i = 0; i < eligible.size(); ++i) {
    int id = eligible[i];
    int64_t hyp = rewards[id] + gains[i];
    int64_t mx = hyp, mn = hyp;
    for (size_t s = 0; s < rewards.size(); ++s) {
      int64_t v = (static_cast<int>(s) == id) ? hyp : rewards[s];
      mx = std::max(mx, v);
      mn = std::min(mn, v);
    }
    int64_t spread = mx - mn;
    if (best < 0 || spread < best_spread) {
      best = id;
      best_spread = spread;
    }
  }
  return best;
}

std::pair<int, int> pick_round_robin(const std::vector<int>& eligible, int cursor, int k) {
  for (int step = 0; step < k; ++step) {
    int cand = (cursor + step) % k;
    if (std::binary_search(eligible.begin(), eligible.end(), cand))
      return {cand, (cand + 1) % k};
  }
  return {eligible.front(), (eligible.front() + 1) % k};
}

namespace {

nlohmann::ordered_json position_json(const Position& p) {
  nlohmann::ordered_json j;
  if (p.at_node()) {
    j["node"] = p.node;
  } else {
    j["edge"] = {p.edge_u, p.edge_v};
    j["offset"] = p.offset;
  }
  return j;
}

// Trace events are scheduled as the simulation decides them (pickups and
// deliveries are known at assignment time) and stable-sorted by timestamp at
// the end, which puts a delivery happening at t ahead of requests arriving
// at t — the same order the simulation itself applies.
struct TraceLog {
  std::vector<std::pair<Timestep, std::string>> events;
  bool enabled = false;

  void emit(Timestep ts, const nlohmann::ordered_json& j) {
    if (enabled) events.emplace_back(ts, j.dump());
  }
  std::string render() {
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    for (auto& [ts, line] : events) {
      out += line;
      out += '\n';
    }
    return out;
  }
};

}  // namespace

SimulationResult simulate(const Instance& inst, PolicyKind policy, uint64_t seed,
                          bool enable_trace) {
  const MetricSpace& ms = inst.metric;
  if (static_cast<int>(inst.initial_positions.size()) != inst.k)
    throw InvalidParameter("simulate: need one initial position per server");
  const int n = static_cast<int>(inst.requests.size());
  const bool doc4food = policy == PolicyKind::Doc4Food;

  std::vector<ServerState> servers(inst.k);
  for (int i = 0; i < inst.k; ++i) {
    servers[i].id = i;
    servers[i].anchor = inst.initial_positions[i];
    servers[i].drifted = Position::at(servers[i].anchor);
  }
  std::vector<int64_t> rewards(inst.k, 0);

  std::vector<NearestSource> table;
  if (doc4food && !inst.source_set.empty()) table = nearest_source_table(ms, inst.source_set);

  Rng rng(seed);
  int cursor = 0;

  SimulationResult res;
  res.outcomes.resize(n);
  for (int j = 0; j < n; ++j) res.outcomes[j].request_id = inst.requests[j].id;

  TraceLog log;
  log.enabled = enable_trace;

  auto release = [&](ServerState& s, Timestep now) {
    if (s.pending_dest >= 0 && s.busy_until <= now) {
      s.anchor = s.pending_dest;
      s.drifted = Position::at(s.anchor);
      s.pending_dest = -1;
    }
  };

  size_t next_req = 0;
  for (Timestep now = 0; now <= inst.horizon; ++now) {
    for (ServerState& s : servers) release(s, now);

    while (next_req < inst.requests.size() && inst.requests[next_req].t_begin == now) {
      const Request& r = inst.requests[next_req];
      const size_t j = next_req;
      ++next_req;

      log.emit(now, {{"ts", now}, {"event", "arrive"}, {"request", r.id}});

      std::vector<int> elig = eligible_servers(inst, servers, r, now, doc4food);
      if (doc4food) {
        std::vector<int> anchor_elig = eligible_servers(inst, servers, r, now, false);
        for (int i = 0; i < inst.k; ++i) {
          bool a = std::binary_search(anchor_elig.begin(), anchor_elig.end(), i);
          bool b = std::binary_search(elig.begin(), elig.end(), i);
          if (a != b) ++res.divergence;
        }
      }

      if (elig.empty()) {
        log.emit(now, {{"ts", now}, {"event", "unserved"}, {"request", r.id}});
        continue;
      }

      int choice;
      switch (policy) {
        case PolicyKind::Random:
          choice = pick_random(elig, rewards, rng);
          break;
        case PolicyKind::GreedyMin:
        case PolicyKind::Doc4Food:
          choice = pick_greedy_min(elig, rewards);
          break;
        case PolicyKind::MinDelta: {
          std::vector<int64_t> gains(elig.size());
          for (size_t i = 0; i < elig.size(); ++i) {
            NodeId a = servers[elig[i]].anchor;
            gains[i] = ms.dist(a, r.source) + ms.dist(r.source, r.dest);
          }
          choice = pick_min_delta(elig, rewards, gains);
          break;
        }
        case PolicyKind::RoundRobin: {
          auto [pick, next_cursor] = pick_round_robin(elig, cursor, inst.k);
          choice = pick;
          cursor = next_cursor;
          break;
        }
        default:
          throw InvalidParameter("simulate: unknown policy");
      }

      ServerState& sv = servers[choice];
      int64_t gain = ms.dist(sv.anchor, r.source) + ms.dist(r.source, r.dest);
      Position from = doc4food ? sv.drifted : Position::at(sv.anchor);
      Timestep steps = inst.steps_for_distance(position_dist(ms, from, r.source));
      Timestep pickup = std::min(std::max(now + steps, r.t_begin), r.t_end);
      Timestep delivery = pickup + inst.travel_steps(r.source, r.dest);

      sv.busy_until = delivery;
      sv.pending_dest = r.dest;
      sv.reward += gain;
      rewards[choice] += gain;

      RequestOutcome& oc = res.outcomes[j];
      oc.server = choice;
      oc.assign_ts = now;
      oc.pickup_ts = pickup;
      oc.delivery_ts = delivery;
      oc.reward = gain;

      log.emit(now, {{"ts", now},
                     {"event", "assign"},
                     {"request", r.id},
                     {"server", choice},
                     {"reward_delta", gain}});
      log.emit(pickup, {{"ts", pickup},
                        {"event", "pickup"},
                        {"request", r.id},
                        {"server", choice},
                        {"node", r.source}});
      log.emit(delivery, {{"ts", delivery},
                          {"event", "deliver"},
                          {"request", r.id},
                          {"server", choice},
                          {"node", r.dest}});
    }

    if (doc4food && !table.empty() && now < inst.horizon) {
      for (ServerState& s : servers) {
        if (s.busy_until > now) continue;
        Position before = s.drifted;
        drift_toward_sources(ms, table, s.drifted, inst.step_distance());
        bool moved = !(before.at_node() && s.drifted.at_node() && before.node == s.drifted.node) &&
                     !(!before.at_node() && !s.drifted.at_node() && before.edge_u == s.drifted.edge_u &&
                       before.edge_v == s.drifted.edge_v && before.offset == s.drifted.offset);
        if (moved)
          log.emit(now, {{"ts", now},
                         {"event", "drift"},
                         {"server", s.id},
                         {"pos", position_json(s.drifted)}});
      }
    }
  }

  res.per_server = servers;
  res.server_rewards.resize(inst.k);
  for (int i = 0; i < inst.k; ++i) res.server_rewards[i] = servers[i].reward;
  for (const RequestOutcome& oc : res.outcomes) {
    if (oc.server < 0) {
      ++res.unserved;
    } else {
      res.total_reward += oc.reward;
    }
  }
  if (enable_trace) res.trace = log.render();
  return res;
}

}  // namespace fairflow
