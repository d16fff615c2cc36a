#include "gta/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "gta/errors.hpp"

#ifndef GTA_SOURCE_REVISION
#define GTA_SOURCE_REVISION "unknown"
#endif

namespace gta {

namespace {

// Seed stream tags; all randomness of a run funnels through cfg.seed.
enum : std::uint64_t {
  kStreamInit = 1,
  kStreamTrainInstance = 2,
  kStreamLearner = 3,
  kStreamValidation = 4,
  kStreamBaselineSet = 5,
  kStreamEval = 6,
};

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string current_source_revision() { return GTA_SOURCE_REVISION; }

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(
    int count, int jobs,
    const std::function<void(int thread_idx, int begin, int end)>& fn) {
  jobs = std::min(resolve_jobs(jobs), std::max(count, 1));
  if (jobs <= 1) {
    fn(0, 0, count);
    return;
  }
  const int chunk = (count + jobs - 1) / jobs;
  std::vector<std::thread> threads;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int j = 0; j < jobs; ++j) {
    const int begin = j * chunk;
    const int end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, j, begin, end] {
      try {
        fn(j, begin, end);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

int ProblemConfig::resolved_horizon() const {
  if (horizon > 0) return horizon;
  return kind == ProblemKind::TSP ? n + 1 : 2 * n;
}

int ProblemConfig::resolved_capacity() const {
  if (capacity > 0) return capacity;
  if (n <= 10) return 20;
  if (n <= 20) return 30;
  return 40;
}

DynamicInstance ProblemConfig::generate(std::uint64_t seed) const {
  if (kind == ProblemKind::TSP)
    return generate_dynamic_tsp(n, resolved_horizon(), delta_max, seed);
  return generate_dynamic_vrp(n, resolved_horizon(), delta_max,
                              resolved_capacity(), seed);
}

void TrainConfig::validate() const {
  encoder.validate();
  if (epochs <= 0 || instances_per_epoch <= 0 || batch_size <= 0)
    throw ParameterError("train config: counts must be positive");
  if (instances_per_epoch % batch_size != 0)
    throw ParameterError(
        "train config: instances_per_epoch must be divisible by batch_size");
  if (learning_rate <= 0.0) throw ParameterError("train config: bad lr");
  if (baseline_alpha <= 0.0 || baseline_alpha >= 1.0)
    throw ParameterError("train config: alpha must be in (0,1)");
  if (validation_size < 2)
    throw ParameterError("train config: validation_size must be >= 2");
  if (problem.n < 2) throw ParameterError("train config: n must be >= 2");
}

nlohmann::json TrainConfig::to_json() const {
  return {
      {"epochs", epochs},
      {"instances_per_epoch", instances_per_epoch},
      {"batch_size", batch_size},
      {"learning_rate", learning_rate},
      {"problem",
       {{"kind", to_string(problem.kind)},
        {"n", problem.n},
        {"horizon", problem.resolved_horizon()},
        {"delta_max", problem.delta_max},
        {"capacity",
         problem.kind == ProblemKind::VRP ? problem.resolved_capacity() : 0}}},
      {"encoder",
       {{"hidden_dim", encoder.hidden_dim},
        {"num_layers", encoder.num_layers},
        {"num_heads", encoder.num_heads}}},
      {"clip", clip},
      {"decode_mode", to_string(decode_mode)},
      {"baseline_alpha", baseline_alpha},
      {"seed", seed},
      {"validation_size", validation_size},
      {"grad_clip", grad_clip},
      {"jobs", jobs},
      {"out_dir", out_dir},
      {"init_checkpoint", init_checkpoint},
  };
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known{
      "epochs",      "instances_per_epoch",
      "batch_size",  "learning_rate",
      "problem",     "encoder",
      "clip",        "decode_mode",
      "baseline_alpha", "seed",
      "validation_size", "grad_clip",
      "jobs",        "out_dir",
      "init_checkpoint"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ParameterError("unknown config key: " + it.key());
  TrainConfig c;
  c.epochs = j.value("epochs", c.epochs);
  c.instances_per_epoch = j.value("instances_per_epoch", c.instances_per_epoch);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    static const std::vector<std::string> pknown{"kind", "n", "horizon",
                                                 "delta_max", "capacity"};
    for (auto it = p.begin(); it != p.end(); ++it)
      if (std::find(pknown.begin(), pknown.end(), it.key()) == pknown.end())
        throw ParameterError("unknown config key: problem." + it.key());
    c.problem.kind =
        problem_kind_from_string(p.value("kind", std::string("tsp")));
    c.problem.n = p.value("n", c.problem.n);
    c.problem.horizon = p.value("horizon", 0);
    c.problem.delta_max = p.value("delta_max", c.problem.delta_max);
    c.problem.capacity = p.value("capacity", 0);
  }
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    static const std::vector<std::string> eknown{"hidden_dim", "num_layers",
                                                 "num_heads"};
    for (auto it = e.begin(); it != e.end(); ++it)
      if (std::find(eknown.begin(), eknown.end(), it.key()) == eknown.end())
        throw ParameterError("unknown config key: encoder." + it.key());
    c.encoder.hidden_dim = e.value("hidden_dim", c.encoder.hidden_dim);
    c.encoder.num_layers = e.value("num_layers", c.encoder.num_layers);
    c.encoder.num_heads = e.value("num_heads", c.encoder.num_heads);
  }
  c.clip = j.value("clip", c.clip);
  if (j.contains("decode_mode"))
    c.decode_mode = decode_mode_from_string(j.at("decode_mode"));
  c.baseline_alpha = j.value("baseline_alpha", c.baseline_alpha);
  c.seed = j.value("seed", c.seed);
  c.validation_size = j.value("validation_size", c.validation_size);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.jobs = j.value("jobs", c.jobs);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.init_checkpoint = j.value("init_checkpoint", c.init_checkpoint);
  return c;
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& m : history)
    rows.push_back({{"epoch", m.epoch},
                    {"train_cost", m.train_cost},
                    {"val_cost", m.val_cost},
                    {"baseline_swapped", m.baseline_swapped},
                    {"wall_time_s", m.wall_time_s}});
  return {{"schema_version", 1},
          {"resolved_config", resolved_config},
          {"source_revision", source_revision},
          {"start_time", start_time},
          {"seed", seed},
          {"history", rows},
          {"checkpoint_paths", checkpoint_paths}};
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open for writing: " + path);
  out << to_json().dump(2) << '\n';
}

double reinforce_loss(const std::vector<double>& costs,
                      const std::vector<double>& baseline_costs,
                      const std::vector<double>& log_probs) {
  if (costs.size() != baseline_costs.size() ||
      costs.size() != log_probs.size() || costs.empty())
    throw ParameterError("reinforce_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i)
    acc += (costs[i] - baseline_costs[i]) * log_probs[i];
  return acc / static_cast<double>(costs.size());
}

ad::Tape::Id reinforce_loss_on_tape(ad::Tape& tape,
                                    const std::vector<double>& costs,
                                    const std::vector<double>& baseline_costs,
                                    const std::vector<ad::Tape::Id>& log_probs) {
  if (costs.size() != baseline_costs.size() ||
      costs.size() != log_probs.size() || costs.empty())
    throw ParameterError("reinforce_loss: length mismatch");
  ad::Tape::Id acc = -1;
  const double inv = 1.0 / static_cast<double>(costs.size());
  for (std::size_t i = 0; i < costs.size(); ++i) {
    ad::Tape::Id term =
        tape.scale(log_probs[i], (costs[i] - baseline_costs[i]) * inv);
    acc = acc < 0 ? term : tape.add(acc, term);
  }
  return acc;
}

std::vector<double> baseline_rollout(const std::vector<DynamicInstance>& batch,
                                     const ModelParams& incumbent,
                                     DecodeMode mode, int jobs) {
  std::vector<double> costs(batch.size());
  parallel_for(static_cast<int>(batch.size()), jobs,
               [&](int, int begin, int end) {
                 for (int i = begin; i < end; ++i)
                   costs[i] =
                       rollout(batch[i], incumbent, mode, Strategy::GREEDY, 0)
                           .cost;
               });
  return costs;
}

bool baseline_update(const ModelParams& candidate,
                     const ModelParams& incumbent,
                     const std::vector<DynamicInstance>& validation_set,
                     double alpha, DecodeMode mode, int jobs,
                     const GreedySolveFn& solve) {
  if (validation_set.size() < 2)
    throw ParameterError("baseline_update: validation set too small");
  GreedySolveFn fn = solve;
  if (!fn)
    fn = [mode](const ModelParams& p, const DynamicInstance& inst) {
      return rollout(inst, p, mode, Strategy::GREEDY, 0);
    };
  const int count = static_cast<int>(validation_set.size());
  std::vector<double> cand(count), inc(count);
  parallel_for(count, jobs, [&](int, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      cand[i] = fn(candidate, validation_set[i]).cost;
      inc[i] = fn(incumbent, validation_set[i]).cost;
    }
  });
  double mean_diff = 0.0;
  for (int i = 0; i < count; ++i) mean_diff += cand[i] - inc[i];
  mean_diff /= count;
  if (mean_diff >= 0.0) return false;
  double var = 0.0;
  for (int i = 0; i < count; ++i) {
    const double d = cand[i] - inc[i] - mean_diff;
    var += d * d;
  }
  var /= (count - 1);
  if (var == 0.0) return true;  // uniformly better
  const double t_stat = mean_diff / std::sqrt(var / count);
  boost::math::students_t dist(count - 1);
  const double p = boost::math::cdf(dist, t_stat);  // one-sided, H1: mean < 0
  return p < alpha;
}

EvalSummary evaluate(const ModelParams& params,
                     const std::vector<DynamicInstance>& instances,
                     EvalStrategy strategy, DecodeMode mode, int jobs,
                     std::uint64_t seed) {
  if (instances.empty()) throw ParameterError("evaluate: no instances");
  EvalSummary summary;
  summary.per_instance.resize(instances.size());
  summary.solutions.resize(instances.size());
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(static_cast<int>(instances.size()), jobs,
               [&](int, int begin, int end) {
                 for (int i = begin; i < end; ++i) {
                   Solution sol;
                   switch (strategy.kind) {
                     case EvalStrategy::Kind::GREEDY:
                       sol = rollout(instances[i], params, mode,
                                     Strategy::GREEDY, 0);
                       break;
                     case EvalStrategy::Kind::BEAM:
                       sol = beam_search(instances[i], params, mode,
                                         strategy.param);
                       break;
                     case EvalStrategy::Kind::SAMPLE: {
                       for (int s = 0; s < std::max(1, strategy.param); ++s) {
                         Solution trial =
                             rollout(instances[i], params, mode,
                                     Strategy::SAMPLE,
                                     derive_seed(seed, kStreamEval, i, s));
                         if (s == 0 || trial.cost < sol.cost)
                           sol = std::move(trial);
                       }
                       break;
                     }
                   }
                   summary.per_instance[i] = sol.cost;
                   summary.solutions[i] = std::move(sol);
                 }
               });
  const auto t1 = std::chrono::steady_clock::now();
  summary.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  double acc = 0.0;
  for (double c : summary.per_instance) acc += c;
  summary.mean_cost = acc / static_cast<double>(instances.size());
  for (const auto& sol : summary.solutions)
    if (!sol.feasible) ++summary.infeasible_count;
  return summary;
}

void save_checkpoint(const std::string& path_base, const ModelParams& params,
                     const nlohmann::json& sidecar_extra) {
  save_params(path_base + ".bin", params);
  nlohmann::json sidecar = {
      {"schema_version", 1},
      {"kind", to_string(params.kind)},
      {"encoder",
       {{"hidden_dim", params.config.hidden_dim},
        {"num_layers", params.config.num_layers},
        {"num_heads", params.config.num_heads}}},
      {"clip", params.dec.clip},
  };
  for (auto it = sidecar_extra.begin(); it != sidecar_extra.end(); ++it)
    sidecar[it.key()] = it.value();
  std::ofstream out(path_base + ".json", std::ios::binary);
  if (!out)
    throw ParameterError("cannot open for writing: " + path_base + ".json");
  out << sidecar.dump(2) << '\n';
}

std::pair<ModelParams, nlohmann::json> load_checkpoint(
    const std::string& path_base) {
  std::ifstream in(path_base + ".json", std::ios::binary);
  if (!in)
    throw ParameterError("cannot open for reading: " + path_base + ".json");
  nlohmann::json sidecar = nlohmann::json::parse(in, nullptr, false);
  if (sidecar.is_discarded())
    throw ParseError("invalid checkpoint sidecar: " + path_base + ".json");
  EncoderConfig cfg;
  cfg.hidden_dim = sidecar.at("encoder").at("hidden_dim").get<int>();
  cfg.num_layers = sidecar.at("encoder").at("num_layers").get<int>();
  cfg.num_heads = sidecar.at("encoder").at("num_heads").get<int>();
  ModelParams params = ModelParams::init(
      problem_kind_from_string(sidecar.at("kind").get<std::string>()), cfg, 0,
      sidecar.value("clip", 10.0));
  load_params(path_base + ".bin", params);
  return {std::move(params), std::move(sidecar)};
}

void AdamOptimizer::step(ModelParams& params, const ModelParams& grads) {
  if (!m_) {
    m_ = ModelParams::zeros_like(params);
    v_ = ModelParams::zeros_like(params);
  }
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, step_count_);
  const double bc2 = 1.0 - std::pow(beta2_, step_count_);

  std::vector<Mat*> p, m, v;
  std::vector<const Mat*> g;
  params.visit([&p](const std::string&, Mat& mat) { p.push_back(&mat); });
  m_->visit([&m](const std::string&, Mat& mat) { m.push_back(&mat); });
  v_->visit([&v](const std::string&, Mat& mat) { v.push_back(&mat); });
  grads.visit([&g](const std::string&, const Mat& mat) { g.push_back(&mat); });
  for (std::size_t k = 0; k < p.size(); ++k) {
    Mat& mk = *m[k];
    Mat& vk = *v[k];
    mk = beta1_ * mk + (1.0 - beta1_) * (*g[k]);
    vk = beta2_ * vk + (1.0 - beta2_) * g[k]->cwiseProduct(*g[k]);
    p[k]->array() -=
        lr_ * (mk.array() / bc1) / ((vk.array() / bc2).sqrt() + eps_);
  }
}

namespace {

void dump_diagnostics(const TrainConfig& cfg, int epoch, int batch_idx,
                      const std::vector<DynamicInstance>& batch,
                      const std::vector<double>& costs,
                      const std::vector<double>& baselines,
                      const std::vector<double>& lps) {
  const std::string path = cfg.out_dir + "/diagnostic_batch.json";
  nlohmann::json j = {{"epoch", epoch},
                      {"batch", batch_idx},
                      {"costs", costs},
                      {"baseline_costs", baselines},
                      {"log_probs", lps}};
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& inst : batch) seeds.push_back(inst.seed);
  j["instance_seeds"] = seeds;
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  save_instances(cfg.out_dir + "/diagnostic_batch.ndjson", batch);
}

}  // namespace

RunManifest train_with_ops(const TrainConfig& cfg, const TrainOps& ops) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const int jobs = resolve_jobs(cfg.jobs);

  ModelParams params =
      cfg.init_checkpoint.empty()
          ? ModelParams::init(cfg.problem.kind, cfg.encoder,
                              derive_seed(cfg.seed, kStreamInit), cfg.clip)
          : load_checkpoint(cfg.init_checkpoint).first;
  if (params.kind != cfg.problem.kind)
    throw ParameterError("init checkpoint problem kind mismatch");
  ModelParams incumbent = params;

  AdamOptimizer adam(cfg.learning_rate);

  std::vector<DynamicInstance> val_set;
  val_set.reserve(cfg.validation_size);
  for (int i = 0; i < cfg.validation_size; ++i)
    val_set.push_back(
        cfg.problem.generate(derive_seed(cfg.seed, kStreamValidation, i)));

  RunManifest manifest;
  manifest.resolved_config = cfg.to_json();
  manifest.source_revision = current_source_revision();
  manifest.start_time = iso_timestamp();
  manifest.seed = cfg.seed;

  std::ofstream metrics(cfg.out_dir + "/metrics.ndjson",
                        std::ios::binary | std::ios::trunc);
  if (!metrics)
    throw ParameterError("cannot open metrics file in " + cfg.out_dir);

  const int batches = cfg.instances_per_epoch / cfg.batch_size;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto epoch_t0 = std::chrono::steady_clock::now();
    double epoch_cost_acc = 0.0;

    for (int b = 0; b < batches; ++b) {
      std::vector<DynamicInstance> batch;
      batch.reserve(cfg.batch_size);
      for (int i = 0; i < cfg.batch_size; ++i)
        batch.push_back(cfg.problem.generate(derive_seed(
            cfg.seed, kStreamTrainInstance, epoch, b * cfg.batch_size + i)));

      std::vector<double> costs(cfg.batch_size), baselines(cfg.batch_size),
          lps(cfg.batch_size);
      std::vector<ModelParams> thread_grads(
          jobs, ModelParams::zeros_like(params));

      parallel_for(cfg.batch_size, jobs, [&](int tid, int begin, int end) {
        for (int i = begin; i < end; ++i) {
          ad::Tape tape(/*grad_enabled=*/true);
          ModelBinding binding = ModelBinding::bind(tape, params);
          TapedRollout rolled = ops.learner(
              tape, binding, params, batch[i],
              derive_seed(cfg.seed, kStreamLearner, epoch,
                          b * cfg.batch_size + i));
          const double bcost = ops.greedy(incumbent, batch[i]).cost;
          costs[i] = rolled.solution.cost;
          baselines[i] = bcost;
          lps[i] = *rolled.solution.log_prob;
          if (!std::isfinite(costs[i]) || !std::isfinite(lps[i])) continue;
          // d(loss)/d(lp_i) = (cost - baseline)/B; one backward per
          // instance keeps at most `jobs` tapes alive.
          tape.backward(rolled.log_prob,
                        (costs[i] - bcost) / cfg.batch_size);
          binding.accumulate_grads(tape, thread_grads[tid]);
        }
      });

      const double loss = reinforce_loss(costs, baselines, lps);
      if (!std::isfinite(loss)) {
        dump_diagnostics(cfg, epoch, b, batch, costs, baselines, lps);
        throw InvariantViolation(
            "non-finite loss at epoch " + std::to_string(epoch) + " batch " +
            std::to_string(b) + "; diagnostics dumped to " + cfg.out_dir);
      }

      ModelParams grads = std::move(thread_grads[0]);
      for (int j = 1; j < jobs; ++j) {
        std::vector<const Mat*> src;
        std::vector<Mat*> dst;
        thread_grads[j].visit(
            [&src](const std::string&, const Mat& m) { src.push_back(&m); });
        grads.visit([&dst](const std::string&, Mat& m) { dst.push_back(&m); });
        for (std::size_t k = 0; k < dst.size(); ++k) *dst[k] += *src[k];
      }
      const double norm = grad_global_norm(grads);
      if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip)
        scale_params(grads, cfg.grad_clip / norm);
      adam.step(params, grads);

      for (double c : costs) epoch_cost_acc += c;
    }

    EvalSummary val;
    {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<double> vc(val_set.size());
      parallel_for(static_cast<int>(val_set.size()), jobs,
                   [&](int, int begin, int end) {
                     for (int i = begin; i < end; ++i)
                       vc[i] = ops.greedy(params, val_set[i]).cost;
                   });
      double acc = 0.0;
      for (double c : vc) acc += c;
      val.mean_cost = acc / static_cast<double>(vc.size());
      val.per_instance = std::move(vc);
      val.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
    }

    // Baseline decision set is regenerated each epoch with a fresh seed.
    std::vector<DynamicInstance> decision_set;
    decision_set.reserve(cfg.validation_size);
    for (int i = 0; i < cfg.validation_size; ++i)
      decision_set.push_back(cfg.problem.generate(
          derive_seed(cfg.seed, kStreamBaselineSet, epoch, i)));
    const bool swapped =
        baseline_update(params, incumbent, decision_set, cfg.baseline_alpha,
                        cfg.decode_mode, jobs, ops.greedy);
    if (swapped) incumbent = params;

    const std::string ckpt_base =
        cfg.out_dir + "/checkpoint_epoch_" + std::to_string(epoch);
    save_checkpoint(ckpt_base, params,
                    {{"epoch", epoch},
                     {"validation_cost", val.mean_cost},
                     {"decode_mode", to_string(cfg.decode_mode)},
                     {"config", cfg.to_json()}});
    manifest.checkpoint_paths.push_back(ckpt_base);

    EpochMetrics em;
    em.epoch = epoch;
    em.train_cost =
        epoch_cost_acc / static_cast<double>(cfg.instances_per_epoch);
    em.val_cost = val.mean_cost;
    em.baseline_swapped = swapped;
    em.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_t0)
            .count();
    manifest.history.push_back(em);

    metrics << nlohmann::json({{"epoch", em.epoch},
                               {"train_cost", em.train_cost},
                               {"val_cost", em.val_cost},
                               {"baseline_swapped", em.baseline_swapped},
                               {"wall_time_s", em.wall_time_s}})
                   .dump()
            << '\n';
    metrics.flush();
    manifest.write(cfg.out_dir + "/manifest.json");
  }
  return manifest;
}

RunManifest train(const TrainConfig& cfg) {
  TrainOps ops;
  const DecodeMode mode = cfg.decode_mode;
  ops.learner = [mode](ad::Tape& tape, const ModelBinding& binding,
                       const ModelParams& params, const DynamicInstance& inst,
                       std::uint64_t seed) {
    return rollout_on_tape(tape, binding, params, inst, mode, Strategy::SAMPLE,
                           seed);
  };
  ops.greedy = [mode](const ModelParams& params, const DynamicInstance& inst) {
    return rollout(inst, params, mode, Strategy::GREEDY, 0);
  };
  return train_with_ops(cfg, ops);
}

}  // namespace gta
