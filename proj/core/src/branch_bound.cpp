#include "fairflow/solve.hpp"

#include <chrono>
#include <cmath>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "fairflow/errors.hpp"
#include "fairflow/lp_solver.hpp"

namespace fairflow {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kHuge = 1e100;

struct Node {
  double bound;   // optimistic objective inherited from the parent relaxation
  int64_t order;  // creation order, breaks bound ties deterministically
  std::vector<std::pair<int, int>> fixes;  // (binary var, forced value)
};

struct NodeWorse {
  bool maximize;
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return maximize ? (a.bound < b.bound) : (a.bound > b.bound);
    return a.order > b.order;
  }
};

double gap_for(double incumbent) {
  return std::max(1e-9, 1e-6 * std::fabs(incumbent));
}

}  // namespace

Solution solve_embedded(const MilpModel& model, const SolveLimits& limits) {
  if (model.num_vars > kEmbeddedVarLimit)
    throw GuardRailExceeded("embedded solver: model has " + std::to_string(model.num_vars) +
                            " variables, above the built-in limit of " +
                            std::to_string(kEmbeddedVarLimit) +
                            "; use an external solver for instances this large");
  if (model.net == nullptr) throw InvalidParameter("embedded solver: model has no network");

  LpProblem relax;
  relax.num_vars = model.num_vars;
  relax.lb = model.lb;
  relax.ub = model.ub;
  relax.obj = model.obj_coef;
  relax.maximize = model.maximize;
  relax.rows = model.rows;

  std::vector<int> binaries;
  for (int j = 0; j < model.num_vars; ++j) {
    if (model.is_binary[j]) binaries.push_back(j);
  }

  const bool maxing = model.maximize;
  auto improves = [&](double bound, double incumbent) {
    double g = gap_for(incumbent);
    return maxing ? bound > incumbent + g : bound < incumbent - g;
  };
  auto strictly_better = [&](double a, double b) {
    return maxing ? a > b + 1e-12 : a < b - 1e-12;
  };

  std::priority_queue<Node, std::vector<Node>, NodeWorse> open{NodeWorse{maxing}};
  int64_t order = 0;
  open.push(Node{maxing ? kHuge : -kHuge, order, {}});

  std::vector<double> best_x;
  double best_obj = 0.0;
  bool have_incumbent = false;
  std::vector<double> root_x;
  int64_t nodes = 0;
  bool limit_hit = false;
  const auto t_start = std::chrono::steady_clock::now();

  while (!open.empty()) {
    if (nodes >= limits.max_nodes) {
      limit_hit = true;
      break;
    }
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (elapsed > limits.max_seconds) {
      limit_hit = true;
      break;
    }

    Node nd = open.top();
    open.pop();
    if (have_incumbent && !improves(nd.bound, best_obj)) continue;

    for (const auto& [var, val] : nd.fixes) {
      relax.lb[var] = val;
      relax.ub[var] = val;
    }
    ++nodes;
    LpResult res = solve_lp(relax);
    for (const auto& [var, val] : nd.fixes) {
      relax.lb[var] = model.lb[var];
      relax.ub[var] = model.ub[var];
    }

    if (res.status == LpStatus::Infeasible) continue;
    if (res.status != LpStatus::Optimal)
      throw NumericalFailure("embedded solver: a node relaxation did not converge");
    if (nodes == 1) root_x = res.x;

    double bound = res.objective;
    if (have_incumbent && !improves(bound, best_obj)) continue;

    // Branch on the most fractional binary; lower variable id wins ties.
    int branch_var = -1;
    double most = kIntTol;
    for (int j : binaries) {
      double v = res.x[j];
      double dist = std::min(v, 1.0 - v);
      if (dist > most) {
        most = dist;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      if (!have_incumbent || strictly_better(bound, best_obj)) {
        best_obj = bound;
        best_x = res.x;
        have_incumbent = true;
      }
      continue;
    }

    Node down{bound, ++order, nd.fixes};
    down.fixes.emplace_back(branch_var, 0);
    Node up{bound, ++order, nd.fixes};
    up.fixes.emplace_back(branch_var, 1);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  Solution sol;
  sol.nodes_explored = nodes;
  if (!have_incumbent) {
    if (!limit_hit) {
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    // Caps hit before any integral point: hand back the root relaxation so
    // the caller at least sees the fractional shape of the problem.
    sol.status = SolveStatus::LimitReached;
    if (root_x.empty()) return sol;
    best_x = root_x;
  } else {
    sol.status = limit_hit ? SolveStatus::LimitReached : SolveStatus::Optimal;
  }

  const int spe = model.servers_per_edge();
  const int num_edges = static_cast<int>(model.net->edges().size());
  const int n_requests = static_cast<int>(model.net->instance().requests.size());

  std::vector<double> x = std::move(best_x);
  sol.z.assign(n_requests, 0);
  for (int j = 0; j < n_requests; ++j) {
    double v = x[model.z_var(j)];
    int r = static_cast<int>(std::lround(v));
    sol.z[j] = r;
    x[model.z_var(j)] = r;  // exact integers keep the objective reproducible
  }
  sol.flows.assign(x.begin(), x.begin() + static_cast<size_t>(num_edges) * spe);
  if (model.spec.objective == MilpObjective::MaxMin) {
    sol.rewards.resize(model.spec.k);
    for (int i = 0; i < model.spec.k; ++i) sol.rewards[i] = x[model.reward_var(i)];
    sol.min_reward = x[model.minreward_var()];
  }
  double obj = 0.0;
  for (int j = 0; j < model.num_vars; ++j) obj += model.obj_coef[j] * x[j];
  sol.objective_value = obj;
  return sol;
}

}  // namespace fairflow
