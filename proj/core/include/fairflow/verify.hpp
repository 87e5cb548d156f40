#pragma once

#include <map>
#include <string>
#include <vector>

#include "fairflow/milp.hpp"

namespace fairflow {

// Residual report from the standalone feasibility check. `family_max` keys:
// bounds, start, reward, reward_floor, pickup, serve, balance, fleet,
// reward_cap, objective.
struct ResidualReport {
  double max_residual = 0.0;
  std::map<std::string, double> family_max;
  std::string worst_detail;  // human-readable locator of the worst residual

  bool ok(double tol) const { return max_residual <= tol; }
};

// Recomputes every constraint of the flow formulation directly from the
// network structure and the solution values. Deliberately shares no code
// with the model builder or the simplex: it walks nodes and edges itself, so
// a bug in row assembly or in the solver shows up here as a residual.
ResidualReport verify_solution(const TimeExpandedNetwork& net, const ModelSpec& spec,
                               const Solution& sol);

}  // namespace fairflow
