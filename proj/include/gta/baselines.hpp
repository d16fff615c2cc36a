#pragma once

#include <cstdint>
#include <optional>

#include "gta/instances.hpp"

namespace gta {

struct OracleResult {
  std::vector<int> order;
  double cost = 0.0;
  bool optimal = false;
  long long nodes_expanded = 0;
};

// Dynamic nearest neighbor: starts at node 0; at step t picks the unvisited
// node closest under the step-t edge cost (which measures distances against
// next-step coordinates). Closing edge appended.
Solution nearest_neighbor_dynamic(const DynamicInstance& inst);

// Held-Karp dynamic program over (visited subset, last node). Arrival time
// at the k-th visited node is exactly k, so the state determines all future
// costs and the result is provably optimal for the fixed start. n <= 16.
OracleResult exact_dp_tsp(const DynamicInstance& inst, int start = 0);

// The DP repeated from every start node; the min is the global optimum over
// all tours (time-indexed costs are not rotation invariant).
OracleResult exact_dp_tsp_min_over_starts(const DynamicInstance& inst);

// Exhaustive enumeration. TSP (n <= 9): all tours, optionally restricted to
// a fixed start. VRP (n <= 6): depth-first search over feasible action
// sequences with depot revisits, bounded by max_depth (default 2n+2).
OracleResult brute_force(const DynamicInstance& inst,
                         std::optional<int> start = std::nullopt,
                         int max_depth = 0);

// Uniform choice among valid actions each step; feasible by construction.
Solution random_policy(const DynamicInstance& inst, std::uint64_t seed);

}  // namespace gta
