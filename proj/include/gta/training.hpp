#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gta/decoder.hpp"
#include "gta/instances.hpp"
#include "gta/model.hpp"

namespace gta {

struct ProblemConfig {
  ProblemKind kind = ProblemKind::TSP;
  int n = 10;
  int horizon = 0;  // 0 = default (n+1 for TSP, 2n for VRP)
  double delta_max = 0.1;
  int capacity = 0;  // 0 = default by size (20/30/40 for n<=10/20/50)

  int resolved_horizon() const;
  int resolved_capacity() const;
  DynamicInstance generate(std::uint64_t seed) const;
};

struct TrainConfig {
  int epochs = 50;
  int instances_per_epoch = 12800;
  int batch_size = 32;
  double learning_rate = 1e-4;
  ProblemConfig problem;
  EncoderConfig encoder;
  double clip = 10.0;
  DecodeMode decode_mode = DecodeMode::TEMPORAL;
  double baseline_alpha = 0.05;
  std::uint64_t seed = 0;
  int validation_size = 1000;
  double grad_clip = 1.0;
  int jobs = 0;  // 0 = hardware concurrency
  std::string out_dir = "run";
  std::string init_checkpoint;  // warm start, optional

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochMetrics {
  int epoch = 0;
  double train_cost = 0.0;
  double val_cost = 0.0;
  bool baseline_swapped = false;
  double wall_time_s = 0.0;
};

struct RunManifest {
  nlohmann::json resolved_config;
  std::string source_revision;
  std::string start_time;
  std::uint64_t seed = 0;
  std::vector<EpochMetrics> history;
  std::vector<std::string> checkpoint_paths;

  nlohmann::json to_json() const;
  void write(const std::string& path) const;
};

// --- REINFORCE pieces ---------------------------------------------------

// mean((cost - baseline) * log_prob); baselines are constants.
double reinforce_loss(const std::vector<double>& costs,
                      const std::vector<double>& baseline_costs,
                      const std::vector<double>& log_probs);

// Same quantity built on a tape so its gradient (the Eq.-of-the-estimator)
// can flow into the policy parameters behind `log_probs`.
ad::Tape::Id reinforce_loss_on_tape(ad::Tape& tape,
                                    const std::vector<double>& costs,
                                    const std::vector<double>& baseline_costs,
                                    const std::vector<ad::Tape::Id>& log_probs);

// Greedy rollouts of a frozen incumbent; no gradients flow.
std::vector<double> baseline_rollout(
    const std::vector<DynamicInstance>& batch, const ModelParams& incumbent,
    DecodeMode mode, int jobs = 0);

using GreedySolveFn =
    std::function<Solution(const ModelParams&, const DynamicInstance&)>;

// Replace the incumbent iff the candidate's mean greedy cost is lower and a
// one-sided paired t-test rejects equality at level alpha.
bool baseline_update(const ModelParams& candidate, const ModelParams& incumbent,
                     const std::vector<DynamicInstance>& validation_set,
                     double alpha, DecodeMode mode, int jobs = 0,
                     const GreedySolveFn& solve = {});

// --- evaluation -----------------------------------------------------------

struct EvalStrategy {
  enum class Kind { GREEDY, BEAM, SAMPLE };
  Kind kind = Kind::GREEDY;
  int param = 1;  // beam width or sample count

  static EvalStrategy greedy() { return {Kind::GREEDY, 1}; }
  static EvalStrategy beam(int k) { return {Kind::BEAM, k}; }
  static EvalStrategy sample(int m) { return {Kind::SAMPLE, m}; }
};

struct EvalSummary {
  double mean_cost = 0.0;
  std::vector<double> per_instance;
  std::vector<Solution> solutions;
  double wall_time_s = 0.0;
  int infeasible_count = 0;
};

EvalSummary evaluate(const ModelParams& params,
                     const std::vector<DynamicInstance>& instances,
                     EvalStrategy strategy, DecodeMode mode, int jobs = 0,
                     std::uint64_t seed = 0);

// --- the training loop ------------------------------------------------

// Rollout plumbing, swappable so the real-time trainer can reuse the loop.
struct TrainOps {
  std::function<TapedRollout(ad::Tape&, const ModelBinding&,
                             const ModelParams&, const DynamicInstance&,
                             std::uint64_t)>
      learner;                // SAMPLE rollout with gradients
  GreedySolveFn greedy;       // baseline / validation rollout, no gradients
};

RunManifest train(const TrainConfig& config);
RunManifest train_with_ops(const TrainConfig& config, const TrainOps& ops);

// --- checkpoints ---------------------------------------------------------

void save_checkpoint(const std::string& path_base, const ModelParams& params,
                     const nlohmann::json& sidecar_extra);
std::pair<ModelParams, nlohmann::json> load_checkpoint(
    const std::string& path_base);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(ModelParams& params, const ModelParams& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::optional<ModelParams> m_, v_;
};

int resolve_jobs(int jobs);
void parallel_for(int count, int jobs,
                  const std::function<void(int thread_idx, int begin, int end)>& fn);
std::string current_source_revision();

}  // namespace gta
