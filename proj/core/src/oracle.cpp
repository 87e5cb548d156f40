#include "fairflow/oracle.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairflow/errors.hpp"
#include "fairflow/metric.hpp"

namespace fairflow {

namespace {

// Rewards achievable by one server that serves exactly the requests in
// `order` starting from `start`, or nullopt-like via `ok = false`.
bool schedule_reward(const Instance& inst, NodeId start, const std::vector<int>& order,
                     OracleTiming timing, int64_t& reward_out) {
  const MetricSpace& ms = inst.metric;
  NodeId pos = start;
  Timestep free_at = 0;
  int64_t reward = 0;
  for (int idx : order) {
    const Request& r = inst.requests[idx];
    Timestep to_src = inst.travel_steps(pos, r.source);
    if (timing == OracleTiming::EarliestPickup) {
      Timestep pickup = std::max(free_at + to_src, r.t_begin);
      if (pickup > r.t_end) return false;
      free_at = pickup + inst.travel_steps(r.source, r.dest);
    } else {
      if (to_src > r.t_end - r.t_begin) return false;
      if (free_at > r.t_end - to_src) return false;
      free_at = r.t_end + inst.travel_steps(r.source, r.dest);
    }
    reward += ms.dist(pos, r.source) + ms.dist(r.source, r.dest);
    pos = r.dest;
  }
  reward_out = reward;
  return true;
}

// For every subset of requests: the sorted set of rewards some service order
// (and permitted start) can realize. Empty vector = subset unservable.
std::vector<std::vector<int64_t>> subset_reward_sets(const Instance& inst,
                                                     const std::vector<NodeId>& starts,
                                                     OracleTiming timing) {
  const int n = static_cast<int>(inst.requests.size());
  std::vector<std::vector<int64_t>> table(static_cast<size_t>(1) << n);
  std::vector<int> order;
  for (uint32_t mask = 0; mask < table.size(); ++mask) {
    if (mask == 0) {
      table[mask] = {0};
      continue;
    }
    order.clear();
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) order.push_back(j);
    std::set<int64_t> rewards;
    for (NodeId start : starts) {
      std::vector<int> perm = order;
      do {
        int64_t reward = 0;
        if (schedule_reward(inst, start, perm, timing, reward)) rewards.insert(reward);
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    table[mask].assign(rewards.begin(), rewards.end());
  }
  return table;
}

}  // namespace

OracleResult brute_force_oracle(const Instance& inst, OracleTiming timing, bool free_start) {
  const int n = static_cast<int>(inst.requests.size());
  const int k = inst.k;
  const int m = inst.metric.node_count();
  if (n > 8 || k > 3)
    throw GuardRailExceeded("oracle: exhaustive search is limited to 8 requests and 3 servers (got n=" +
                            std::to_string(n) + ", k=" + std::to_string(k) + ")");
  if (free_start && m > 16)
    throw GuardRailExceeded("oracle: free-start search is limited to 16 locations (got " +
                            std::to_string(m) + ")");
  if (!free_start && static_cast<int>(inst.initial_positions.size()) != k)
    throw InvalidParameter("oracle: fixed starts need one initial position per server");

  // One reward table per distinct start regime. Under free_start all servers
  // share the union-over-starts table.
  std::vector<const std::vector<std::vector<int64_t>>*> server_table(k);
  std::vector<std::vector<std::vector<int64_t>>> tables;
  if (free_start) {
    std::vector<NodeId> all(m);
    for (int v = 0; v < m; ++v) all[v] = v;
    tables.push_back(subset_reward_sets(inst, all, timing));
    for (int s = 0; s < k; ++s) server_table[s] = &tables[0];
  } else {
    std::map<NodeId, size_t> by_start;
    tables.reserve(k);
    for (int s = 0; s < k; ++s) {
      NodeId st = inst.initial_positions[s];
      auto it = by_start.find(st);
      if (it == by_start.end()) {
        tables.push_back(subset_reward_sets(inst, {st}, timing));
        it = by_start.emplace(st, tables.size() - 1).first;
      }
      server_table[s] = &tables[it->second];
    }
  }

  const int64_t num_assign = [&] {
    int64_t a = 1;
    for (int j = 0; j < n; ++j) a *= (k + 1);
    return a;
  }();

  OracleResult out;
  out.maxmin_unserved = n + 1;  // sentinel, beaten by the all-dropped assignment
  out.mincost_unserved = n + 1;
  std::vector<int> digits(n);
  std::vector<uint32_t> masks(k);

  auto decode = [&](int64_t code) {
    for (int j = 0; j < n; ++j) {
      digits[j] = static_cast<int>(code % (k + 1));
      code /= (k + 1);
    }
    std::fill(masks.begin(), masks.end(), 0u);
    for (int j = 0; j < n; ++j)
      if (digits[j] < k) masks[digits[j]] |= (1u << j);
  };

  for (int64_t code = 0; code < num_assign; ++code) {
    decode(code);
    int unserved = 0;
    for (int j = 0; j < n; ++j)
      if (digits[j] == k) ++unserved;

    bool feasible = true;
    int64_t min_of_max = 0;
    int64_t sum_of_min = 0;
    for (int s = 0; s < k && feasible; ++s) {
      const std::vector<int64_t>& set = (*server_table[s])[masks[s]];
      if (set.empty()) {
        feasible = false;
        break;
      }
      int64_t mx = set.back();
      if (s == 0 || mx < min_of_max) min_of_max = mx;
      sum_of_min += set.front();
    }
    if (!feasible) continue;

    if (unserved < out.maxmin_unserved ||
        (unserved == out.maxmin_unserved && min_of_max > out.maxmin_value)) {
      out.maxmin_unserved = unserved;
      out.maxmin_value = min_of_max;
      out.maxmin_assignment.assign(n, -1);
      for (int j = 0; j < n; ++j)
        if (digits[j] < k) out.maxmin_assignment[j] = digits[j];
    }
    if (unserved < out.mincost_unserved ||
        (unserved == out.mincost_unserved && sum_of_min < out.mincost_value)) {
      out.mincost_unserved = unserved;
      out.mincost_value = sum_of_min;
      out.mincost_assignment.assign(n, -1);
      for (int j = 0; j < n; ++j)
        if (digits[j] < k) out.mincost_assignment[j] = digits[j];
    }
  }

  // Second sweep: can every server hit exactly the optimal value at once?
  for (int64_t code = 0; code < num_assign && !out.equal_split_at_optimum; ++code) {
    decode(code);
    int unserved = 0;
    for (int j = 0; j < n; ++j)
      if (digits[j] == k) ++unserved;
    if (unserved != out.maxmin_unserved) continue;
    bool all_hit = true;
    for (int s = 0; s < k && all_hit; ++s) {
      const std::vector<int64_t>& set = (*server_table[s])[masks[s]];
      all_hit = std::binary_search(set.begin(), set.end(), out.maxmin_value);
    }
    out.equal_split_at_optimum = all_hit;
  }

  return out;
}

}  // namespace fairflow
