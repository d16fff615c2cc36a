#include "gta/instances.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gta/errors.hpp"

namespace gta {

std::string to_string(ProblemKind kind) {
  return kind == ProblemKind::TSP ? "tsp" : "vrp";
}

ProblemKind problem_kind_from_string(const std::string& s) {
  if (s == "tsp") return ProblemKind::TSP;
  if (s == "vrp") return ProblemKind::VRP;
  throw ParameterError("unknown problem kind: " + s);
}

bool DynamicInstance::is_static_node(int i) const {
  return std::find(static_nodes.begin(), static_nodes.end(), i) !=
         static_nodes.end();
}

RolloutState RolloutState::initial(const DynamicInstance& inst) {
  RolloutState s;
  s.visited.assign(inst.n, 0);
  if (inst.kind == ProblemKind::VRP) {
    s.remaining_capacity = inst.capacity;
    s.remaining_demand = inst.demands;
  }
  return s;
}

bool RolloutState::complete(const DynamicInstance& inst) const {
  if (inst.kind == ProblemKind::TSP) {
    for (int i = 0; i < inst.n; ++i)
      if (!visited[i]) return false;
    return true;
  }
  for (int i = 1; i < inst.n; ++i)
    if (remaining_demand[i] > 0) return false;
  return true;
}

void RolloutState::apply(const DynamicInstance& inst, int node) {
  if (node < 0 || node >= inst.n)
    throw ParameterError("node index out of range");
  if (inst.kind == ProblemKind::VRP) {
    if (node == 0) {
      remaining_capacity = inst.capacity;
    } else {
      remaining_capacity -= remaining_demand[node];
      remaining_demand[node] = 0;
    }
  }
  visited[node] = 1;
  current = node;
  ++step;
}

DynamicInstance generate_dynamic_tsp(int n, int horizon, double delta_max,
                                     std::uint64_t seed) {
  if (n < 2) throw ParameterError("generate_dynamic_tsp: n must be >= 2");
  if (horizon < n + 1)
    throw ParameterError("generate_dynamic_tsp: horizon must be >= n+1");
  if (delta_max < 0.0 || delta_max > 1.0)
    throw ParameterError("generate_dynamic_tsp: delta_max must be in [0,1]");

  DynamicInstance inst;
  inst.kind = ProblemKind::TSP;
  inst.n = n;
  inst.horizon = horizon;
  inst.seed = seed;
  inst.delta_max = delta_max;
  inst.features.resize(static_cast<Eigen::Index>(horizon) * n, 2);

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    inst.features(i, 0) = rng.uniform();
    inst.features(i, 1) = rng.uniform();
  }
  for (int t = 1; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        double prev = inst.features((static_cast<Eigen::Index>(t) - 1) * n + i, d);
        double step = rng.uniform(-delta_max, delta_max);
        inst.features(static_cast<Eigen::Index>(t) * n + i, d) =
            std::clamp(prev + step, 0.0, 1.0);
      }
    }
  }
  return inst;
}

DynamicInstance generate_dynamic_vrp(int n, int horizon, double delta_max,
                                     int capacity, std::uint64_t seed) {
  if (n < 2) throw ParameterError("generate_dynamic_vrp: n must be >= 2");
  if (horizon < 2 * n)
    throw ParameterError("generate_dynamic_vrp: horizon must be >= 2n");
  if (delta_max < 0.0 || delta_max > 1.0)
    throw ParameterError("generate_dynamic_vrp: delta_max must be in [0,1]");
  if (capacity <= 9)
    throw ParameterError(
        "generate_dynamic_vrp: capacity must exceed the maximum demand of 9");

  DynamicInstance inst;
  inst.kind = ProblemKind::VRP;
  inst.n = n;
  inst.horizon = horizon;
  inst.seed = seed;
  inst.delta_max = delta_max;
  inst.capacity = capacity;
  inst.static_nodes = {0};
  inst.features.resize(static_cast<Eigen::Index>(horizon) * n, 2);

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    inst.features(i, 0) = rng.uniform();
    inst.features(i, 1) = rng.uniform();
  }
  for (int t = 1; t < horizon; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        double prev = inst.features((static_cast<Eigen::Index>(t) - 1) * n + i, d);
        if (i == 0) {  // depot never moves
          inst.features(static_cast<Eigen::Index>(t) * n + i, d) = prev;
          continue;
        }
        double step = rng.uniform(-delta_max, delta_max);
        inst.features(static_cast<Eigen::Index>(t) * n + i, d) =
            std::clamp(prev + step, 0.0, 1.0);
      }
    }
  }
  inst.demands.assign(n, 0);
  for (int i = 1; i < n; ++i)
    inst.demands[i] = 1 + static_cast<int>(rng.below(9));
  return inst;
}

double edge_cost(const DynamicInstance& inst, int i, int j, int t) {
  if (i < 0 || i >= inst.n || j < 0 || j >= inst.n)
    throw ParameterError("edge_cost: node index out of range");
  if (t < 0) throw ParameterError("edge_cost: negative time step");
  const int ta = std::min(t, inst.horizon - 1);
  const int tb = std::min(t + 1, inst.horizon - 1);
  const double dx = inst.x(ta, i) - inst.x(tb, j);
  const double dy = inst.y(ta, i) - inst.y(tb, j);
  return std::sqrt(dx * dx + dy * dy);
}

double tour_cost(const DynamicInstance& inst, const std::vector<int>& order) {
  if (order.empty()) throw ParameterError("tour_cost: empty order");
  double total = 0.0;
  for (std::size_t s = 0; s + 1 < order.size(); ++s)
    total += edge_cost(inst, order[s], order[s + 1], static_cast<int>(s));
  if (inst.kind == ProblemKind::TSP && order.size() >= 2)
    total += edge_cost(inst, order.back(), order.front(),
                       static_cast<int>(order.size()) - 1);
  return total;
}

std::pair<bool, std::vector<std::string>> is_feasible(
    const DynamicInstance& inst, const std::vector<int>& order) {
  std::vector<std::string> violations;
  RolloutState state = RolloutState::initial(inst);
  for (std::size_t s = 0; s < order.size(); ++s) {
    const int node = order[s];
    if (node < 0 || node >= inst.n) {
      violations.push_back("node index out of range at step " +
                           std::to_string(s));
      return {false, violations};
    }
    if (inst.kind == ProblemKind::TSP) {
      if (state.visited[node])
        violations.push_back("repeated node " + std::to_string(node));
    } else {
      if (node == 0) {
        if (state.current == 0)
          violations.push_back("depot revisited without movement at step " +
                               std::to_string(s));
      } else {
        if (state.remaining_demand[node] == 0)
          violations.push_back(state.visited[node]
                                   ? "repeated node " + std::to_string(node)
                                   : "node " + std::to_string(node) +
                                         " has no demand");
        else if (state.remaining_demand[node] > state.remaining_capacity)
          violations.push_back("capacity exceeded at node " +
                               std::to_string(node));
      }
    }
    state.apply(inst, node);
  }
  if (inst.kind == ProblemKind::TSP) {
    if (order.size() != static_cast<std::size_t>(inst.n)) {
      violations.push_back("tour length " + std::to_string(order.size()) +
                           " does not cover all " + std::to_string(inst.n) +
                           " nodes");
    }
  } else {
    for (int i = 1; i < inst.n; ++i)
      if (state.remaining_demand[i] > 0)
        violations.push_back("unserved demand at node " + std::to_string(i));
  }
  return {violations.empty(), violations};
}

std::vector<std::uint8_t> valid_actions(const DynamicInstance& inst,
                                        const RolloutState& state) {
  std::vector<std::uint8_t> mask(inst.n, 0);
  if (inst.kind == ProblemKind::TSP) {
    for (int i = 0; i < inst.n; ++i) mask[i] = state.visited[i] ? 0 : 1;
    return mask;
  }
  bool any_customer = false;
  for (int i = 1; i < inst.n; ++i) {
    if (state.remaining_demand[i] > 0 &&
        state.remaining_demand[i] <= state.remaining_capacity) {
      mask[i] = 1;
      any_customer = true;
    }
  }
  const bool at_depot = state.current == 0;
  mask[0] = at_depot ? 0 : 1;
  if (!any_customer && !mask[0]) {
    for (int i = 1; i < inst.n; ++i)
      if (state.remaining_demand[i] > 0)
        throw InvariantViolation(
            "valid_actions: no valid action with unserved demand");
    // Complete and parked at the depot; no actions remain.
  }
  return mask;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

// Records are written by hand so floating values carry a fixed 17
// significant digits; nlohmann parses them back exactly.
std::string encode_instance(const DynamicInstance& inst) {
  std::string s = "{\"schema_version\":1,\"kind\":\"";
  s += to_string(inst.kind);
  s += "\",\"n\":" + std::to_string(inst.n);
  s += ",\"horizon\":" + std::to_string(inst.horizon);
  s += ",\"delta_max\":";
  append_double(s, inst.delta_max);
  s += ",\"seed\":" + std::to_string(inst.seed);
  s += ",\"features\":[";
  for (int t = 0; t < inst.horizon; ++t) {
    if (t) s += ',';
    s += '[';
    for (int i = 0; i < inst.n; ++i) {
      if (i) s += ',';
      s += '[';
      append_double(s, inst.x(t, i));
      s += ',';
      append_double(s, inst.y(t, i));
      s += ']';
    }
    s += ']';
  }
  s += "],\"static_nodes\":[";
  for (std::size_t k = 0; k < inst.static_nodes.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(inst.static_nodes[k]);
  }
  s += "],\"demands\":[";
  for (std::size_t k = 0; k < inst.demands.size(); ++k) {
    if (k) s += ',';
    s += std::to_string(inst.demands[k]);
  }
  s += "],\"capacity\":" + std::to_string(inst.capacity) + "}";
  return s;
}

DynamicInstance decode_instance(const nlohmann::json& j, std::size_t record) {
  auto fail = [record](const std::string& why) -> ParseError {
    return ParseError("instance record " + std::to_string(record) + ": " + why);
  };
  try {
    if (j.at("schema_version").get<int>() != 1)
      throw fail("unsupported schema_version");
    DynamicInstance inst;
    inst.kind = problem_kind_from_string(j.at("kind").get<std::string>());
    inst.n = j.at("n").get<int>();
    inst.horizon = j.at("horizon").get<int>();
    inst.delta_max = j.at("delta_max").get<double>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    if (inst.n <= 0 || inst.horizon <= 0) throw fail("non-positive dimensions");
    const auto& feats = j.at("features");
    if (feats.size() != static_cast<std::size_t>(inst.horizon))
      throw fail("features outer arity != horizon");
    inst.features.resize(static_cast<Eigen::Index>(inst.horizon) * inst.n, 2);
    for (int t = 0; t < inst.horizon; ++t) {
      const auto& slice = feats.at(t);
      if (slice.size() != static_cast<std::size_t>(inst.n))
        throw fail("features slice arity != n");
      for (int i = 0; i < inst.n; ++i) {
        const auto& pt = slice.at(i);
        if (pt.size() != 2) throw fail("feature point arity != 2");
        inst.features(static_cast<Eigen::Index>(t) * inst.n + i, 0) =
            pt.at(0).get<double>();
        inst.features(static_cast<Eigen::Index>(t) * inst.n + i, 1) =
            pt.at(1).get<double>();
      }
    }
    inst.static_nodes = j.at("static_nodes").get<std::vector<int>>();
    inst.demands = j.at("demands").get<std::vector<int>>();
    inst.capacity = j.at("capacity").get<int>();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
}

}  // namespace

void save_instances(const std::string& path,
                    const std::vector<DynamicInstance>& instances) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open for writing: " + path);
  for (const auto& inst : instances) out << encode_instance(inst) << '\n';
  if (!out) throw ParameterError("write failed: " + path);
}

std::vector<DynamicInstance> load_instances(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open for reading: " + path);
  std::vector<DynamicInstance> out;
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw ParseError("instance record " + std::to_string(record) +
                       ": invalid JSON");
    out.push_back(decode_instance(j, record));
    ++record;
  }
  return out;
}

}  // namespace gta
