#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gta/errors.hpp"
#include "gta/training.hpp"
#include "test_util.hpp"

using namespace gta;
using gta_test::tiny_model;

namespace {

namespace fs = std::filesystem;

std::string temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

TrainConfig smoke_config(const std::string& out) {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.instances_per_epoch = 64;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-3;
  cfg.problem.kind = ProblemKind::TSP;
  cfg.problem.n = 5;
  cfg.encoder = gta_test::tiny_config(8, 1, 2);
  cfg.validation_size = 8;
  cfg.seed = 123;
  cfg.jobs = 2;
  cfg.out_dir = out;
  return cfg;
}

}  // namespace

TEST_SUITE("training") {

TEST_CASE("reinforce_loss direct formula") {
  CHECK(reinforce_loss({4.0, 4.0}, {4.0, 4.0}, {-1.0, -2.0}) == 0.0);
  CHECK(reinforce_loss({5.0, 3.0}, {4.0, 4.0}, {-1.0, -2.0}) ==
        doctest::Approx(0.5));
  CHECK_THROWS_AS(reinforce_loss({1.0}, {1.0, 2.0}, {0.0}), ParameterError);
}

TEST_CASE("reinforce_loss gradient matches finite differences on a tiny policy") {
  ModelParams p = tiny_model(ProblemKind::TSP, 7);
  std::vector<DynamicInstance> batch;
  std::vector<std::vector<int>> orders;
  for (int i = 0; i < 3; ++i) {
    batch.push_back(generate_dynamic_tsp(4, 5, 0.1, 70 + i));
    orders.push_back(
        rollout(batch[i], p, DecodeMode::TEMPORAL, Strategy::SAMPLE, i).order);
  }
  const std::vector<double> costs{1.3, 0.7, 2.1};
  const std::vector<double> baselines{1.0, 1.0, 1.0};

  auto loss_of = [&](const ModelParams& m) {
    std::vector<double> lps;
    for (int i = 0; i < 3; ++i)
      lps.push_back(score_order(batch[i], m, DecodeMode::TEMPORAL, orders[i]));
    return reinforce_loss(costs, baselines, lps);
  };

  ad::Tape tape(true);
  ModelBinding binding = ModelBinding::bind(tape, p);
  std::vector<ad::Tape::Id> lp_ids;
  for (int i = 0; i < 3; ++i) {
    ad::Tape::Id x = tape.leaf(batch[i].features);
    ad::Tape::Id h = encode(tape, binding.enc, p.config, x, batch[i].horizon,
                            batch[i].n, batch[i].static_nodes);
    RolloutState state = RolloutState::initial(batch[i]);
    std::optional<int> first, last;
    ad::Tape::Id lp_total = -1;
    for (int node : orders[i]) {
      std::vector<std::uint8_t> mask = valid_actions(batch[i], state);
      ad::Tape::Id h_d = temporal_pointer(tape, h, batch[i].horizon,
                                          batch[i].n, state.step,
                                          DecodeMode::TEMPORAL);
      ad::Tape::Id ctx =
          context_embedding_tsp(tape, binding.dec, h_d, first, last);
      DecodeStepIds ids = decode_step(tape, binding.dec, h_d, ctx, mask,
                                      p.config.num_heads, p.dec.clip);
      ad::Tape::Id lp = tape.pick(ids.log_probs, 0, node);
      lp_total = lp_total < 0 ? lp : tape.add(lp_total, lp);
      state.apply(batch[i], node);
      if (!first) first = node;
      last = node;
    }
    lp_ids.push_back(lp_total);
  }
  ad::Tape::Id loss = reinforce_loss_on_tape(tape, costs, baselines, lp_ids);
  CHECK(tape.val(loss)(0, 0) == doctest::Approx(loss_of(p)).epsilon(1e-12));
  tape.backward(loss);
  ModelParams analytic = ModelParams::zeros_like(p);
  binding.accumulate_grads(tape, analytic);

  CHECK(gta_test::gradcheck_model(p, loss_of, analytic, 1e-6) < 1e-4);
}

TEST_CASE("gradients depend on costs and baselines only through advantages") {
  ModelParams p = tiny_model(ProblemKind::TSP, 8);
  DynamicInstance inst = generate_dynamic_tsp(4, 5, 0.1, 80);
  const std::vector<int> order =
      rollout(inst, p, DecodeMode::TEMPORAL, Strategy::GREEDY, 0).order;

  auto grads_for = [&](double cost, double baseline) {
    ad::Tape tape(true);
    ModelBinding binding = ModelBinding::bind(tape, p);
    ad::Tape::Id x = tape.leaf(inst.features);
    ad::Tape::Id h = encode(tape, binding.enc, p.config, x, inst.horizon,
                            inst.n, inst.static_nodes);
    RolloutState state = RolloutState::initial(inst);
    std::optional<int> first, last;
    ad::Tape::Id lp_total = -1;
    for (int node : order) {
      std::vector<std::uint8_t> mask = valid_actions(inst, state);
      ad::Tape::Id h_d = temporal_pointer(tape, h, inst.horizon, inst.n,
                                          state.step, DecodeMode::TEMPORAL);
      ad::Tape::Id ctx =
          context_embedding_tsp(tape, binding.dec, h_d, first, last);
      DecodeStepIds ids = decode_step(tape, binding.dec, h_d, ctx, mask,
                                      p.config.num_heads, p.dec.clip);
      ad::Tape::Id lp = tape.pick(ids.log_probs, 0, node);
      lp_total = lp_total < 0 ? lp : tape.add(lp_total, lp);
      state.apply(inst, node);
      if (!first) first = node;
      last = node;
    }
    ad::Tape::Id loss =
        reinforce_loss_on_tape(tape, {cost}, {baseline}, {lp_total});
    tape.backward(loss);
    ModelParams g = ModelParams::zeros_like(p);
    binding.accumulate_grads(tape, g);
    return g;
  };

  ModelParams a = grads_for(2.5, 1.0);
  ModelParams b = grads_for(9.5, 8.0);  // same advantage, shifted by 7
  double diff = 0.0;
  std::vector<const Mat*> va, vb;
  a.visit([&va](const std::string&, const Mat& m) { va.push_back(&m); });
  b.visit([&vb](const std::string&, const Mat& m) { vb.push_back(&m); });
  for (std::size_t k = 0; k < va.size(); ++k)
    diff = std::max(diff, (*va[k] - *vb[k]).cwiseAbs().maxCoeff());
  CHECK(diff < 1e-12);
}

TEST_CASE("baseline_rollout matches direct greedy rollouts and is deterministic") {
  ModelParams p = tiny_model(ProblemKind::TSP, 9);
  std::vector<DynamicInstance> batch;
  for (int i = 0; i < 6; ++i)
    batch.push_back(generate_dynamic_tsp(5, 6, 0.1, 90 + i));
  const std::vector<double> costs = baseline_rollout(batch, p,
                                                     DecodeMode::TEMPORAL, 2);
  const std::vector<double> again = baseline_rollout(batch, p,
                                                     DecodeMode::TEMPORAL, 1);
  REQUIRE(costs.size() == 6);
  CHECK(costs == again);
  for (int i = 0; i < 6; ++i)
    CHECK(costs[i] ==
          rollout(batch[i], p, DecodeMode::TEMPORAL, Strategy::GREEDY, 0).cost);
}

TEST_CASE("baseline_update decisions") {
  ModelParams cand = tiny_model(ProblemKind::TSP, 10);
  ModelParams inc = tiny_model(ProblemKind::TSP, 11);
  cand.dec.clip = 10.0;  // markers so the canned solver can tell them apart
  inc.dec.clip = 20.0;
  std::vector<DynamicInstance> set;
  for (int i = 0; i < 10; ++i)
    set.push_back(generate_dynamic_tsp(4, 5, 0.1, i));

  auto canned = [](const std::vector<double>& cand_costs,
                   const std::vector<double>& inc_costs) {
    return [cand_costs, inc_costs](const ModelParams& p,
                                   const DynamicInstance& inst) {
      Solution s;
      const std::size_t i = inst.seed;  // instance index by construction
      s.cost = p.dec.clip == 10.0 ? cand_costs[i] : inc_costs[i];
      return s;
    };
  };

  SUBCASE("uniformly better candidate replaces the incumbent") {
    std::vector<double> lo(10, 1.0), hi(10, 2.0);
    CHECK(baseline_update(cand, inc, set, 0.05, DecodeMode::TEMPORAL, 1,
                          canned(lo, hi)));
  }
  SUBCASE("identical costs never replace") {
    std::vector<double> same(10, 1.5);
    CHECK(!baseline_update(cand, inc, set, 0.05, DecodeMode::TEMPORAL, 1,
                           canned(same, same)));
  }
  SUBCASE("borderline cases match a hand-computed t statistic") {
    // paired diffs chosen by hand; t = mean / (sd / sqrt(10));
    // one-sided critical value at alpha=0.05, dof=9 is -1.833113.
    std::vector<double> inc_costs(10, 5.0);
    const std::vector<double> diffs_significant{-0.30, -0.25, -0.35, -0.28,
                                                -0.31, -0.27, -0.33, -0.29,
                                                -0.26, -0.36};
    // mean=-0.3, sd~=0.0337 -> t ~= -28: far beyond the critical value
    std::vector<double> cand_sig(10);
    for (int i = 0; i < 10; ++i) cand_sig[i] = 5.0 + diffs_significant[i];
    CHECK(baseline_update(cand, inc, set, 0.05, DecodeMode::TEMPORAL, 1,
                          canned(cand_sig, inc_costs)));

    const std::vector<double> diffs_noisy{-0.5, 0.4, -0.6, 0.5,  -0.4,
                                          0.45, -0.55, 0.5, -0.45, 0.5};
    // mean=-0.065, sd~=0.52 -> t ~= -0.40: not significant at 0.05
    std::vector<double> cand_noisy(10);
    for (int i = 0; i < 10; ++i) cand_noisy[i] = 5.0 + diffs_noisy[i];
    CHECK(!baseline_update(cand, inc, set, 0.05, DecodeMode::TEMPORAL, 1,
                           canned(cand_noisy, inc_costs)));
  }
  SUBCASE("tiny validation sets are rejected") {
    std::vector<DynamicInstance> one{set[0]};
    CHECK_THROWS_AS(baseline_update(cand, inc, one, 0.05,
                                    DecodeMode::TEMPORAL, 1, {}),
                    ParameterError);
  }
}

TEST_CASE("train smoke run writes checkpoint, metrics and manifest") {
  const std::string out = temp_dir("gta_train_smoke");
  TrainConfig cfg = smoke_config(out);
  RunManifest manifest = train(cfg);
  REQUIRE(manifest.history.size() == 1);
  CHECK(manifest.checkpoint_paths.size() == 1);
  CHECK(fs::exists(out + "/checkpoint_epoch_0.bin"));
  CHECK(fs::exists(out + "/checkpoint_epoch_0.json"));
  CHECK(fs::exists(out + "/metrics.ndjson"));
  CHECK(fs::exists(out + "/manifest.json"));
  CHECK(manifest.history[0].train_cost > 0.0);
  CHECK(manifest.history[0].val_cost > 0.0);

  std::ifstream metrics(out + "/metrics.ndjson");
  std::string line;
  int rows = 0;
  while (std::getline(metrics, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1);
  fs::remove_all(out);
}

TEST_CASE("training is deterministic given seeds and jobs") {
  const std::string out1 = temp_dir("gta_det_1");
  const std::string out2 = temp_dir("gta_det_2");
  TrainConfig cfg1 = smoke_config(out1);
  TrainConfig cfg2 = smoke_config(out2);
  cfg1.epochs = cfg2.epochs = 2;
  RunManifest m1 = train(cfg1);
  RunManifest m2 = train(cfg2);
  REQUIRE(m1.history.size() == m2.history.size());
  for (std::size_t e = 0; e < m1.history.size(); ++e) {
    CHECK(m1.history[e].train_cost == m2.history[e].train_cost);
    CHECK(m1.history[e].val_cost == m2.history[e].val_cost);
    CHECK(m1.history[e].baseline_swapped == m2.history[e].baseline_swapped);
  }
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("a few epochs beat the random initialization on TSP5") {
  const std::string out = temp_dir("gta_tsp5_learn");
  TrainConfig cfg = smoke_config(out);
  cfg.epochs = 5;
  cfg.instances_per_epoch = 256;
  cfg.validation_size = 256;
  cfg.learning_rate = 1e-3;
  cfg.encoder = gta_test::tiny_config(16, 1, 2);
  RunManifest manifest = train(cfg);

  // random-init validation cost, measured on the same fixed validation set
  ModelParams init = ModelParams::init(ProblemKind::TSP, cfg.encoder,
                                       derive_seed(cfg.seed, 1), cfg.clip);
  std::vector<DynamicInstance> val;
  for (int i = 0; i < cfg.validation_size; ++i)
    val.push_back(cfg.problem.generate(derive_seed(cfg.seed, 4, i)));
  const double init_cost =
      evaluate(init, val, EvalStrategy::greedy(), cfg.decode_mode, 2).mean_cost;
  CHECK(manifest.history.back().val_cost < init_cost);
  fs::remove_all(out);
}

TEST_CASE("evaluate reports the arithmetic mean and keeps per-instance costs") {
  ModelParams p = tiny_model(ProblemKind::TSP, 12);
  std::vector<DynamicInstance> set;
  for (int i = 0; i < 7; ++i)
    set.push_back(generate_dynamic_tsp(5, 6, 0.1, 300 + i));
  EvalSummary s = evaluate(p, set, EvalStrategy::greedy(),
                           DecodeMode::TEMPORAL, 2);
  REQUIRE(s.per_instance.size() == 7);
  double acc = 0.0;
  for (double c : s.per_instance) acc += c;
  CHECK(s.mean_cost == doctest::Approx(acc / 7));
  CHECK(s.infeasible_count == 0);

  EvalSummary best_of = evaluate(p, set, EvalStrategy::sample(8),
                                 DecodeMode::TEMPORAL, 2, 99);
  CHECK(best_of.mean_cost <= s.mean_cost + 1e-9);

  CHECK_THROWS_AS(evaluate(p, {}, EvalStrategy::greedy(),
                           DecodeMode::TEMPORAL, 1),
                  ParameterError);
}

TEST_CASE("checkpoint round-trip reproduces the validation mean exactly") {
  ModelParams p = tiny_model(ProblemKind::VRP, 13, 8, 2, 2);
  const std::string base =
      (fs::temp_directory_path() / "gta_ckpt_roundtrip").string();
  save_checkpoint(base, p, {{"epoch", 3}, {"validation_cost", 1.5}});

  auto [loaded, sidecar] = load_checkpoint(base);
  CHECK(sidecar.at("epoch") == 3);
  CHECK(loaded.kind == ProblemKind::VRP);
  CHECK(loaded.config.hidden_dim == 8);

  std::vector<DynamicInstance> set;
  for (int i = 0; i < 5; ++i)
    set.push_back(generate_dynamic_vrp(5, 10, 0.1, 20, 400 + i));
  const double before =
      evaluate(p, set, EvalStrategy::greedy(), DecodeMode::TEMPORAL, 1)
          .mean_cost;
  const double after =
      evaluate(loaded, set, EvalStrategy::greedy(), DecodeMode::TEMPORAL, 1)
          .mean_cost;
  CHECK(std::abs(before - after) < 1e-6);
  fs::remove(base + ".bin");
  fs::remove(base + ".json");
}

TEST_CASE("config parsing rejects unknown keys and bad values") {
  CHECK_THROWS_AS(TrainConfig::from_json({{"epoch", 3}}), ParameterError);
  CHECK_THROWS_AS(TrainConfig::from_json({{"problem", {{"size", 5}}}}),
                  ParameterError);
  TrainConfig cfg = TrainConfig::from_json(
      {{"epochs", 2}, {"problem", {{"kind", "vrp"}, {"n", 7}}}});
  CHECK(cfg.epochs == 2);
  CHECK(cfg.problem.kind == ProblemKind::VRP);
  CHECK(cfg.problem.n == 7);
  CHECK(cfg.problem.resolved_horizon() == 14);

  TrainConfig bad;
  bad.instances_per_epoch = 65;
  bad.batch_size = 32;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

}  // TEST_SUITE
