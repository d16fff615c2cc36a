#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gta/tensor.hpp"

namespace gta {

enum class ProblemKind { TSP, VRP };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& s);

// A dynamic routing instance: node coordinates per time slice, plus VRP
// metadata. Feature rows are laid out time-major: row(t*n + i) is the
// (x, y) position of node i at time t.
struct DynamicInstance {
  ProblemKind kind = ProblemKind::TSP;
  int n = 0;        // node count
  int horizon = 0;  // number of time slices
  Mat features;     // (horizon * n) x 2
  std::vector<int> static_nodes;  // nodes whose coordinates never change
  std::vector<int> demands;       // VRP only; demands[0] == 0 for the depot
  int capacity = 0;               // VRP only
  std::uint64_t seed = 0;
  double delta_max = 0.0;

  Eigen::Block<const Mat> slice(int t) const {
    return features.block(static_cast<Eigen::Index>(t) * n, 0, n, 2);
  }
  double x(int t, int i) const { return features(static_cast<Eigen::Index>(t) * n + i, 0); }
  double y(int t, int i) const { return features(static_cast<Eigen::Index>(t) * n + i, 1); }
  bool is_static_node(int i) const;
};

// An ordered node sequence; order[s] is the node visited at time step s.
struct Solution {
  std::vector<int> order;
  double cost = 0.0;
  bool feasible = false;
  std::vector<std::string> violations;
  std::optional<double> log_prob;
};

// Decoding state shared by rollouts, feasibility replay and baselines.
// `current` is -1 before the first move; for VRP that lets a route begin
// with a depot visit without tripping the at-depot mask.
struct RolloutState {
  int step = 0;
  int current = -1;
  std::vector<std::uint8_t> visited;
  long long remaining_capacity = 0;
  std::vector<int> remaining_demand;

  static RolloutState initial(const DynamicInstance& inst);
  bool complete(const DynamicInstance& inst) const;
  void apply(const DynamicInstance& inst, int node);
};

DynamicInstance generate_dynamic_tsp(int n, int horizon, double delta_max,
                                     std::uint64_t seed);
DynamicInstance generate_dynamic_vrp(int n, int horizon, double delta_max,
                                     int capacity, std::uint64_t seed);

// Cost of moving from node i (departing at step t) to node j (arriving at
// step t+1). Time indices clamp to the final slice.
double edge_cost(const DynamicInstance& inst, int i, int j, int t);

// Total cost of an order under step-indexed edge costs. TSP orders of
// length >= 2 include a closing edge back to the first node, evaluated at
// the final step; VRP routes are open.
double tour_cost(const DynamicInstance& inst, const std::vector<int>& order);

std::pair<bool, std::vector<std::string>> is_feasible(
    const DynamicInstance& inst, const std::vector<int>& order);

// Mask of nodes selectable from `state`; true = selectable.
std::vector<std::uint8_t> valid_actions(const DynamicInstance& inst,
                                        const RolloutState& state);

void save_instances(const std::string& path,
                    const std::vector<DynamicInstance>& instances);
std::vector<DynamicInstance> load_instances(const std::string& path);

}  // namespace gta
