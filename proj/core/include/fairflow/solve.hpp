#pragma once

#include <cstdint>

#include "fairflow/milp.hpp"

namespace fairflow {

// Caps for the embedded branch-and-bound search. When a cap is hit the best
// incumbent found so far is returned with SolveStatus::LimitReached.
struct SolveLimits {
  int64_t max_nodes = 200000;
  double max_seconds = 600.0;
};

// Models beyond this many variables are refused outright: the dense embedded
// solver would grind, and an external solver should be used instead.
inline constexpr int kEmbeddedVarLimit = 50000;

// Solves the mixed-integer model exactly with the built-in simplex plus
// best-bound branch-and-bound over the binary drop variables. Throws
// GuardRailExceeded when the model is too large and NumericalFailure when a
// node relaxation cannot be solved reliably.
Solution solve_embedded(const MilpModel& model, const SolveLimits& limits = {});

}  // namespace fairflow
