#include "fairflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fairflow/errors.hpp"

namespace fairflow {

namespace {

// Minimal round-trip-ish formatting that trims trailing zeros, so integral
// values print as integers. Deterministic across runs and platforms.
std::string fmt_cell(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

Metrics evaluate(std::vector<double> rewards, int unserved) {
  if (rewards.empty()) throw EmptyInput("evaluate: reward vector is empty");
  for (double r : rewards) {
    if (r < 0.0) throw InvalidParameter("evaluate: rewards must be non-negative");
  }
  std::sort(rewards.begin(), rewards.end());
  Metrics m;
  m.unserved = unserved;
  double total = 0.0;
  for (double r : rewards) {
    total += r;
    if (r == 0.0) ++m.zero_reward_count;
  }
  m.cost = total / static_cast<double>(rewards.size());
  m.min_reward = rewards.front();
  m.rewards = std::move(rewards);
  return m;
}

LorenzCurve lorenz_curve(std::vector<double> rewards, double percentile_cut) {
  if (rewards.empty()) throw EmptyInput("lorenz_curve: reward vector is empty");
  for (double r : rewards) {
    if (r < 0.0) throw InvalidParameter("lorenz_curve: rewards must be non-negative");
  }
  std::sort(rewards.begin(), rewards.end());
  const size_t k = rewards.size();
  double total = 0.0;
  for (double r : rewards) total += r;

  LorenzCurve curve;
  curve.full.resize(k);
  double cum = 0.0;
  for (size_t i = 0; i < k; ++i) {
    cum += rewards[i];
    double pop = static_cast<double>(i + 1) / static_cast<double>(k);
    curve.full[i].pop_share = pop;
    curve.full[i].reward_share = total == 0.0 ? pop : cum / total;
  }
  for (const LorenzPoint& p : curve.full) {
    if (p.pop_share <= percentile_cut + 1e-12) curve.prefix.push_back(p);
  }
  return curve;
}

std::string summary_csv(const Metrics& m) {
  std::string out = "metric,value\n";
  out += "unserved," + fmt_cell(m.unserved) + "\n";
  out += "cost," + fmt_cell(m.cost) + "\n";
  out += "min_reward," + fmt_cell(m.min_reward) + "\n";
  out += "zero_reward_count," + fmt_cell(m.zero_reward_count) + "\n";
  return out;
}

std::string lorenz_csv(const std::vector<LorenzPoint>& points) {
  std::string out = "pop_share,reward_share\n";
  for (const LorenzPoint& p : points) {
    out += fmt_cell(p.pop_share);
    out += ',';
    out += fmt_cell(p.reward_share);
    out += '\n';
  }
  return out;
}

std::string metrics_table_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "algorithm,unserved,cost,min_reward,zero_reward_count\n";
  for (const MetricsRow& r : rows) {
    out += r.algorithm;
    out += ',';
    out += fmt_cell(r.unserved);
    out += ',';
    out += fmt_cell(r.cost);
    out += ',';
    out += fmt_cell(r.min_reward);
    out += ',';
    out += fmt_cell(r.zero_reward_count);
    out += '\n';
  }
  return out;
}

}  // namespace fairflow
