#pragma once

#include <cstdint>
#include <vector>

#include "fairflow/instance.hpp"

namespace fairflow {

// Service timing discipline used by the exhaustive search.
//   EarliestPickup: a server departs the moment it is free and, if it arrives
//     before the window opens, waits at the source until it does.
//   DeadlinePickup: a server must be able to cover the source inside the
//     window and departs at the latest moment that lands the pickup exactly
//     on the deadline — the discipline the flow formulation encodes.
enum class OracleTiming { EarliestPickup, DeadlinePickup };

struct OracleResult {
  int maxmin_unserved = 0;
  int64_t maxmin_value = 0;               // best min-over-servers reward
  std::vector<int> maxmin_assignment;     // serving server per request, -1 = dropped
  bool equal_split_at_optimum = false;    // an all-equal-rewards schedule attains the optimum

  int mincost_unserved = 0;
  int64_t mincost_value = 0;              // least total movement
  std::vector<int> mincost_assignment;
};

// Exhaustive schedule search: every request-to-server assignment, every
// per-server service order, and (with free_start) every start node per
// server. Ranking is lexicographic — fewest dropped requests first, then the
// objective. Guard-railed to n <= 8 requests, k <= 3 servers, and m <= 16
// locations under free_start; beyond that it throws GuardRailExceeded.
OracleResult brute_force_oracle(const Instance& inst,
                                OracleTiming timing = OracleTiming::EarliestPickup,
                                bool free_start = false);

}  // namespace fairflow
