#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gta/baselines.hpp"
#include "gta/errors.hpp"
#include "gta/instances.hpp"
#include "test_util.hpp"

using namespace gta;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_SUITE("instances") {

TEST_CASE("tsp generator shape, bounds and determinism") {
  DynamicInstance inst = generate_dynamic_tsp(10, 11, 0.1, 7);
  CHECK(inst.features.rows() == 110);
  CHECK(inst.features.cols() == 2);
  CHECK(inst.features.minCoeff() >= 0.0);
  CHECK(inst.features.maxCoeff() <= 1.0);

  DynamicInstance again = generate_dynamic_tsp(10, 11, 0.1, 7);
  CHECK(inst.features == again.features);  // bitwise

  DynamicInstance other = generate_dynamic_tsp(10, 11, 0.1, 8);
  CHECK(inst.features != other.features);
}

TEST_CASE("zero drift keeps every slice identical") {
  DynamicInstance inst = generate_dynamic_tsp(5, 6, 0.0, 1);
  for (int t = 1; t < inst.horizon; ++t)
    CHECK(Mat(inst.slice(t)) == Mat(inst.slice(0)));
}

TEST_CASE("drift is bounded by delta_max") {
  DynamicInstance inst = generate_dynamic_tsp(8, 12, 0.05, 3);
  for (int t = 1; t < inst.horizon; ++t)
    for (int i = 0; i < inst.n; ++i) {
      CHECK(std::abs(inst.x(t, i) - inst.x(t - 1, i)) <= 0.05 + 1e-12);
      CHECK(std::abs(inst.y(t, i) - inst.y(t - 1, i)) <= 0.05 + 1e-12);
    }
}

TEST_CASE("generator rejects bad parameters") {
  CHECK_THROWS_AS(generate_dynamic_tsp(1, 5, 0.1, 0), ParameterError);
  CHECK_THROWS_AS(generate_dynamic_tsp(5, 5, 0.1, 0), ParameterError);
  CHECK_THROWS_AS(generate_dynamic_tsp(5, 6, 1.5, 0), ParameterError);
  CHECK_THROWS_AS(generate_dynamic_vrp(10, 20, 0.1, 9, 0), ParameterError);
}

TEST_CASE("vrp generator keeps the depot static and demands in range") {
  DynamicInstance inst = generate_dynamic_vrp(10, 20, 0.1, 20, 3);
  for (int t = 1; t < inst.horizon; ++t) {
    CHECK(inst.x(t, 0) == inst.x(0, 0));
    CHECK(inst.y(t, 0) == inst.y(0, 0));
  }
  CHECK(inst.demands[0] == 0);
  for (int i = 1; i < inst.n; ++i) {
    CHECK(inst.demands[i] >= 1);
    CHECK(inst.demands[i] <= 9);
  }
  CHECK(inst.static_nodes == std::vector<int>{0});

  DynamicInstance again = generate_dynamic_vrp(10, 20, 0.1, 20, 3);
  CHECK(inst.features == again.features);
  CHECK(inst.demands == again.demands);
}

TEST_CASE("edge_cost basics") {
  DynamicInstance inst;
  inst.kind = ProblemKind::TSP;
  inst.n = 2;
  inst.horizon = 3;
  inst.features.resize(6, 2);
  inst.features.setZero();
  // node 1 sits at (0.3, 0.4) on slice 1
  inst.features(1 * 2 + 1, 0) = 0.3;
  inst.features(1 * 2 + 1, 1) = 0.4;
  CHECK(edge_cost(inst, 0, 1, 0) == doctest::Approx(0.5));

  DynamicInstance still = generate_dynamic_tsp(5, 6, 0.0, 2);
  for (int i = 0; i < 5; ++i)
    CHECK(edge_cost(still, i, i, 1) == doctest::Approx(0.0));
}

TEST_CASE("edge_cost matches scalar recomputation on a seeded instance") {
  DynamicInstance inst = generate_dynamic_tsp(6, 9, 0.1, 42);
  for (int t = 0; t < 9; ++t)
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const int ta = std::min(t, 8), tb = std::min(t + 1, 8);
        const double expect = std::hypot(inst.x(ta, i) - inst.x(tb, j),
                                         inst.y(ta, i) - inst.y(tb, j));
        CHECK(edge_cost(inst, i, j, t) == doctest::Approx(expect));
      }
}

TEST_CASE("tour_cost on the unit square perimeter is 4") {
  DynamicInstance inst = gta_test::square_instance();
  CHECK(tour_cost(inst, {0, 1, 2, 3}) == doctest::Approx(4.0));
}

TEST_CASE("single-node order has zero cost") {
  DynamicInstance inst = generate_dynamic_tsp(3, 4, 0.1, 5);
  CHECK(tour_cost(inst, {1}) == 0.0);
}

TEST_CASE("tour_cost equals a brute re-summation") {
  DynamicInstance inst = generate_dynamic_tsp(7, 8, 0.1, 12);
  const std::vector<int> order{3, 1, 6, 0, 2, 5, 4};
  double expect = 0.0;
  for (int s = 0; s + 1 < 7; ++s)
    expect += edge_cost(inst, order[s], order[s + 1], s);
  expect += edge_cost(inst, order[6], order[0], 6);
  CHECK(tour_cost(inst, order) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("zero drift reduces to the static tour length") {
  DynamicInstance inst = generate_dynamic_tsp(6, 7, 0.0, 9);
  const std::vector<int> order{0, 2, 4, 1, 3, 5};
  double expect = 0.0;
  for (int s = 0; s < 6; ++s) {
    const int a = order[s], b = order[(s + 1) % 6];
    expect += std::hypot(inst.x(0, a) - inst.x(0, b),
                         inst.y(0, a) - inst.y(0, b));
  }
  CHECK(tour_cost(inst, order) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("is_feasible tsp") {
  DynamicInstance inst = generate_dynamic_tsp(4, 5, 0.1, 1);
  CHECK(is_feasible(inst, {0, 1, 2, 3}).first);
  auto [ok, violations] = is_feasible(inst, {0, 1, 1, 3});
  CHECK(!ok);
  REQUIRE(!violations.empty());
  CHECK(violations[0].find("repeated node") != std::string::npos);
  CHECK(!is_feasible(inst, {0, 1, 2}).first);
}

TEST_CASE("is_feasible vrp capacity violation") {
  DynamicInstance inst;
  inst.kind = ProblemKind::VRP;
  inst.n = 3;
  inst.horizon = 6;
  inst.features = Mat::Zero(18, 2);
  inst.static_nodes = {0};
  inst.demands = {0, 5, 5};
  inst.capacity = 8;
  auto [ok, violations] = is_feasible(inst, {0, 1, 2});
  CHECK(!ok);
  REQUIRE(!violations.empty());
  CHECK(violations[0] == "capacity exceeded at node 2");

  CHECK(is_feasible(inst, {1, 0, 2}).first);  // refill between customers
}

TEST_CASE("valid_actions tsp") {
  DynamicInstance inst = generate_dynamic_tsp(3, 4, 0.1, 2);
  RolloutState state = RolloutState::initial(inst);
  CHECK(valid_actions(inst, state) == std::vector<std::uint8_t>{1, 1, 1});
  state.apply(inst, 0);
  state.apply(inst, 2);
  CHECK(valid_actions(inst, state) == std::vector<std::uint8_t>{0, 1, 0});
}

TEST_CASE("valid_actions vrp masks the depot after a depot visit") {
  DynamicInstance inst = generate_dynamic_vrp(5, 10, 0.1, 20, 4);
  RolloutState state = RolloutState::initial(inst);
  // Before the first move the vehicle has not acted; the depot is allowed.
  std::vector<std::uint8_t> mask = valid_actions(inst, state);
  CHECK(mask[0] == 1);
  state.apply(inst, 0);
  mask = valid_actions(inst, state);
  CHECK(mask[0] == 0);  // just visited the depot
  for (int i = 1; i < 5; ++i) CHECK(mask[i] == 1);  // demands < capacity
  state.apply(inst, 2);
  mask = valid_actions(inst, state);
  CHECK(mask[0] == 1);
  CHECK(mask[2] == 0);  // served
}

TEST_CASE("valid_actions vrp masks customers beyond remaining capacity") {
  DynamicInstance inst;
  inst.kind = ProblemKind::VRP;
  inst.n = 3;
  inst.horizon = 6;
  inst.features = Mat::Zero(18, 2);
  inst.static_nodes = {0};
  inst.demands = {0, 5, 5};
  inst.capacity = 8;
  RolloutState state = RolloutState::initial(inst);
  state.apply(inst, 1);
  const auto mask = valid_actions(inst, state);
  CHECK(mask[0] == 1);
  CHECK(mask[1] == 0);
  CHECK(mask[2] == 0);  // demand 5 > remaining 3
}

TEST_CASE("replay consistency: feasible orders respect masks") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    DynamicInstance inst = generate_dynamic_vrp(6, 12, 0.1, 15, seed);
    Solution sol = random_policy(inst, seed * 31 + 1);
    REQUIRE(sol.feasible);
    RolloutState state = RolloutState::initial(inst);
    for (int node : sol.order) {
      const auto mask = valid_actions(inst, state);
      CHECK(mask[node] == 1);
      state.apply(inst, node);
    }
  }
}

TEST_CASE("masks are never all-false along feasible rollouts") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    DynamicInstance inst = generate_dynamic_tsp(6, 7, 0.1, seed);
    RolloutState state = RolloutState::initial(inst);
    while (!state.complete(inst)) {
      const auto mask = valid_actions(inst, state);
      bool any = false;
      for (auto b : mask) any = any || b;
      CHECK(any);
      for (int j = 0; j < inst.n; ++j)
        if (mask[j]) {
          state.apply(inst, j);
          break;
        }
    }
  }
}

TEST_CASE("save/load round trip is exact") {
  std::vector<DynamicInstance> batch;
  for (int i = 0; i < 50; ++i)
    batch.push_back(generate_dynamic_tsp(6, 8, 0.1, 1000 + i));
  for (int i = 0; i < 50; ++i)
    batch.push_back(generate_dynamic_vrp(5, 10, 0.07, 25, 2000 + i));
  const std::string path = temp_path("gta_roundtrip.ndjson");
  save_instances(path, batch);
  const std::vector<DynamicInstance> loaded = load_instances(path);
  REQUIRE(loaded.size() == batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    CHECK(loaded[i].kind == batch[i].kind);
    CHECK(loaded[i].n == batch[i].n);
    CHECK(loaded[i].horizon == batch[i].horizon);
    CHECK(loaded[i].features == batch[i].features);  // bitwise
    CHECK(loaded[i].static_nodes == batch[i].static_nodes);
    CHECK(loaded[i].demands == batch[i].demands);
    CHECK(loaded[i].capacity == batch[i].capacity);
    CHECK(loaded[i].seed == batch[i].seed);
    CHECK(loaded[i].delta_max == batch[i].delta_max);
  }
  std::filesystem::remove(path);
}

TEST_CASE("load reports the offending record index") {
  const std::string path = temp_path("gta_badfile.ndjson");
  {
    std::vector<DynamicInstance> one{generate_dynamic_tsp(4, 5, 0.1, 1)};
    save_instances(path, one);
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << "{\"schema_version\":1,\"kind\":\"tsp\",\"n\":2,\"horizon\":1,"
           "\"delta_max\":0,\"seed\":0,\"features\":[[[0.1,0.2,0.3],[0.1,"
           "0.2]]],\"static_nodes\":[],\"demands\":[],\"capacity\":0}\n";
  }
  try {
    load_instances(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST_CASE("golden instance file still decodes to the same tensors") {
  const std::string golden = std::string(GTA_GOLDEN_DIR) + "/instances_v1.ndjson";
  const std::vector<DynamicInstance> loaded = load_instances(golden);
  REQUIRE(loaded.size() == 4);
  // Regenerate with the recorded provenance and compare bitwise.
  for (const auto& inst : loaded) {
    DynamicInstance regen =
        inst.kind == ProblemKind::TSP
            ? generate_dynamic_tsp(inst.n, inst.horizon, inst.delta_max,
                                   inst.seed)
            : generate_dynamic_vrp(inst.n, inst.horizon, inst.delta_max,
                                   inst.capacity, inst.seed);
    CHECK(regen.features == inst.features);
    CHECK(regen.demands == inst.demands);
  }
}

}  // TEST_SUITE
