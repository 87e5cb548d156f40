#pragma once

#include <string>
#include <vector>

namespace fairflow {

// Fairness/efficiency summary of one run. `cost` is the mean reward over all
// k servers (zero-reward servers included), so an all-equal reward vector has
// cost == min_reward.
struct Metrics {
  int unserved = 0;
  double cost = 0.0;
  double min_reward = 0.0;
  int zero_reward_count = 0;
  std::vector<double> rewards;  // sorted ascending
};

// Summarizes a per-server reward vector. Throws EmptyInput on an empty
// vector and InvalidParameter on negative rewards.
Metrics evaluate(std::vector<double> rewards, int unserved);

struct LorenzPoint {
  double pop_share = 0.0;
  double reward_share = 0.0;
};

struct LorenzCurve {
  std::vector<LorenzPoint> full;    // k points; the last is always (1, 1)
  std::vector<LorenzPoint> prefix;  // leading points with pop_share <= cut
};

// Cumulative reward share of the poorest fraction of servers: point i is
// (i/k, sum of the i smallest rewards / total). A zero total degenerates to
// the line of equality. `percentile_cut` selects the reported prefix.
LorenzCurve lorenz_curve(std::vector<double> rewards, double percentile_cut = 0.25);

// `metric,value` two-column summary of one Metrics object.
std::string summary_csv(const Metrics& m);

// `pop_share,reward_share` rows of one curve.
std::string lorenz_csv(const std::vector<LorenzPoint>& points);

// One comparison-table row. Doubles allow seed-averaged values; NaN renders
// as an empty cell (used where a quantity is undefined for an algorithm).
struct MetricsRow {
  std::string algorithm;
  double unserved = 0.0;
  double cost = 0.0;
  double min_reward = 0.0;
  double zero_reward_count = 0.0;
};

// `algorithm,unserved,cost,min_reward,zero_reward_count` table, one row per
// algorithm, in the order given. Byte-deterministic.
std::string metrics_table_csv(const std::vector<MetricsRow>& rows);

}  // namespace fairflow
