#pragma once

#include <vector>

#include "fairflow/linear.hpp"

namespace fairflow {

// Continuous linear program over bounded variables. Upper bounds at or above
// 1e30 are treated as +infinity.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> lb, ub;
  std::vector<double> obj;
  bool maximize = false;
  std::vector<LinearRow> rows;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;       // in the caller's sense (max or min)
  std::vector<double> x;        // structural variable values
  int64_t iterations = 0;
};

// Dense two-phase primal simplex with lower/upper variable bounds and bound
// flips. Entering variables are picked by largest reduced-cost violation;
// after a run of degenerate pivots the rule switches to Bland's (smallest
// index) which guarantees termination. Suitable for the desk-scale models
// this project solves exactly; larger models should go to an external solver.
LpResult solve_lp(const LpProblem& problem);

}  // namespace fairflow
