#include "gta/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "gta/errors.hpp"

namespace gta {

Solution nearest_neighbor_dynamic(const DynamicInstance& inst) {
  if (inst.kind != ProblemKind::TSP)
    throw ParameterError("nearest_neighbor_dynamic: TSP instances only");
  Solution sol;
  std::vector<std::uint8_t> visited(inst.n, 0);
  int current = 0;
  visited[0] = 1;
  sol.order.push_back(0);
  for (int step = 0; step + 1 < inst.n; ++step) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int j = 0; j < inst.n; ++j) {
      if (visited[j]) continue;
      const double c = edge_cost(inst, current, j, step);
      if (c < best_cost) {
        best_cost = c;
        best = j;
      }
    }
    visited[best] = 1;
    sol.order.push_back(best);
    current = best;
  }
  sol.cost = tour_cost(inst, sol.order);
  auto [ok, violations] = is_feasible(inst, sol.order);
  sol.feasible = ok;
  sol.violations = std::move(violations);
  return sol;
}

namespace {

// edge costs by departure step, E[t](i,j); t saturates at n-1 which covers
// every step a closed n-node tour can take.
std::vector<Mat> step_costs(const DynamicInstance& inst) {
  std::vector<Mat> e(inst.n);
  for (int t = 0; t < inst.n; ++t) {
    e[t].resize(inst.n, inst.n);
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.n; ++j) e[t](i, j) = edge_cost(inst, i, j, t);
  }
  return e;
}

}  // namespace

OracleResult exact_dp_tsp(const DynamicInstance& inst, int start) {
  if (inst.kind != ProblemKind::TSP)
    throw ParameterError("exact_dp_tsp: TSP instances only");
  if (inst.n > 16)
    throw CapacityError("exact_dp_tsp: n > 16 exceeds the 2^n * n table");
  if (start < 0 || start >= inst.n)
    throw ParameterError("exact_dp_tsp: bad start node");

  const int n = inst.n;
  const std::vector<Mat> e = step_costs(inst);
  const std::size_t full = std::size_t{1} << n;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(full * n, inf);
  std::vector<std::int8_t> parent(full * n, -1);
  OracleResult result;

  const std::size_t start_mask = std::size_t{1} << start;
  cost[start_mask * n + start] = 0.0;

  for (std::size_t mask = 1; mask < full; ++mask) {
    if (!(mask & start_mask)) continue;
    const int t = std::popcount(mask) - 1;  // arrival step of `last`
    for (int last = 0; last < n; ++last) {
      if (!(mask & (std::size_t{1} << last))) continue;
      const double c = cost[mask * n + last];
      if (c == inf) continue;
      for (int j = 0; j < n; ++j) {
        if (mask & (std::size_t{1} << j)) continue;
        const std::size_t next = mask | (std::size_t{1} << j);
        const double nc = c + e[t](last, j);
        ++result.nodes_expanded;
        if (nc < cost[next * n + j]) {
          cost[next * n + j] = nc;
          parent[next * n + j] = static_cast<std::int8_t>(last);
        }
      }
    }
  }

  const std::size_t all = full - 1;
  double best = inf;
  int best_last = -1;
  for (int last = 0; last < n; ++last) {
    const double c = cost[all * n + last];
    if (c == inf) continue;
    const double closed = n >= 2 ? c + e[n - 1](last, start) : c;
    if (closed < best) {
      best = closed;
      best_last = last;
    }
  }

  std::vector<int> order(n);
  std::size_t mask = all;
  int last = best_last;
  for (int pos = n - 1; pos >= 0; --pos) {
    order[pos] = last;
    const int prev = parent[mask * n + last];
    mask &= ~(std::size_t{1} << last);
    last = prev;
  }
  result.order = std::move(order);
  result.cost = best;
  result.optimal = true;
  return result;
}

OracleResult exact_dp_tsp_min_over_starts(const DynamicInstance& inst) {
  OracleResult best;
  for (int s = 0; s < inst.n; ++s) {
    OracleResult r = exact_dp_tsp(inst, s);
    if (s == 0 || r.cost < best.cost) {
      const long long expanded = best.nodes_expanded + r.nodes_expanded;
      best = std::move(r);
      best.nodes_expanded = expanded;
    } else {
      best.nodes_expanded += r.nodes_expanded;
    }
  }
  return best;
}

namespace {

void vrp_dfs(const DynamicInstance& inst, RolloutState& state,
             std::vector<int>& order, double cost_so_far, int max_depth,
             OracleResult& best) {
  if (state.complete(inst)) {
    if (!best.optimal || cost_so_far < best.cost) {
      best.cost = cost_so_far;
      best.order = order;
      best.optimal = true;
    }
    return;
  }
  if (state.step >= max_depth) return;
  const std::vector<std::uint8_t> mask = valid_actions(inst, state);
  for (int j = 0; j < inst.n; ++j) {
    if (!mask[j]) continue;
    ++best.nodes_expanded;
    const double edge =
        order.empty() ? 0.0
                      : edge_cost(inst, order.back(), j,
                                  static_cast<int>(order.size()) - 1);
    RolloutState saved = state;
    order.push_back(j);
    state.apply(inst, j);
    vrp_dfs(inst, state, order, cost_so_far + edge, max_depth, best);
    order.pop_back();
    state = saved;
  }
}

}  // namespace

OracleResult brute_force(const DynamicInstance& inst, std::optional<int> start,
                         int max_depth) {
  OracleResult best;
  best.cost = std::numeric_limits<double>::infinity();
  if (inst.kind == ProblemKind::TSP) {
    if (inst.n > 9)
      throw CapacityError("brute_force: TSP n > 9 is too many permutations");
    std::vector<int> nodes;
    for (int i = 0; i < inst.n; ++i)
      if (!start || i != *start) nodes.push_back(i);
    std::sort(nodes.begin(), nodes.end());
    std::vector<int> order;
    do {
      order.clear();
      if (start) order.push_back(*start);
      order.insert(order.end(), nodes.begin(), nodes.end());
      ++best.nodes_expanded;
      const double c = tour_cost(inst, order);
      if (!best.optimal || c < best.cost) {
        best.cost = c;
        best.order = order;
        best.optimal = true;
      }
    } while (std::next_permutation(nodes.begin(), nodes.end()));
    return best;
  }

  if (inst.n > 6)
    throw CapacityError("brute_force: VRP n > 6 is too many sequences");
  const int depth = max_depth > 0 ? max_depth : 2 * inst.n + 2;
  if (depth > 2 * inst.n + 2)
    throw CapacityError("brute_force: VRP depth bound exceeds 2n+2");
  RolloutState state = RolloutState::initial(inst);
  std::vector<int> order;
  vrp_dfs(inst, state, order, 0.0, depth, best);
  if (!best.optimal)
    throw CapacityError("brute_force: no feasible VRP route within depth");
  return best;
}

Solution random_policy(const DynamicInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  RolloutState state = RolloutState::initial(inst);
  Solution sol;
  const int budget = 4 * inst.horizon;
  while (!state.complete(inst)) {
    if (state.step >= budget)
      throw RunawayError("random_policy exceeded step budget");
    const std::vector<std::uint8_t> mask = valid_actions(inst, state);
    std::vector<int> options;
    for (int j = 0; j < inst.n; ++j)
      if (mask[j]) options.push_back(j);
    const int pick = options[rng.below(options.size())];
    sol.order.push_back(pick);
    state.apply(inst, pick);
  }
  sol.cost = tour_cost(inst, sol.order);
  auto [ok, violations] = is_feasible(inst, sol.order);
  sol.feasible = ok;
  sol.violations = std::move(violations);
  return sol;
}

}  // namespace gta
