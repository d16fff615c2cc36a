#pragma once

#include <functional>
#include <optional>

#include "gta/decoder.hpp"
#include "gta/instances.hpp"
#include "gta/model.hpp"
#include "gta/training.hpp"

namespace gta {

// Pull-based source of one (n x 2) coordinate slice per time step. Slices
// are immutable once revealed.
class FeatureStream {
 public:
  virtual ~FeatureStream() = default;
  std::optional<Mat> next() {
    auto slice = pull();
    if (slice) ++revealed_;
    return slice;
  }
  int revealed_count() const { return revealed_; }

 protected:
  virtual std::optional<Mat> pull() = 0;

 private:
  int revealed_ = 0;
};

// Replays a stored instance one slice at a time.
class InstanceReplayStream : public FeatureStream {
 public:
  explicit InstanceReplayStream(DynamicInstance inst)
      : inst_(std::move(inst)) {}

 protected:
  std::optional<Mat> pull() override {
    if (pos_ >= inst_.horizon) return std::nullopt;
    return Mat(inst_.slice(pos_++));
  }

 private:
  DynamicInstance inst_;
  int pos_ = 0;
};

class CallbackStream : public FeatureStream {
 public:
  explicit CallbackStream(std::function<std::optional<Mat>()> fn)
      : fn_(std::move(fn)) {}

 protected:
  std::optional<Mat> pull() override { return fn_(); }

 private:
  std::function<std::optional<Mat>()> fn_;
};

// Instance metadata a real-time solve needs before any slice arrives.
struct RtMeta {
  ProblemKind kind = ProblemKind::TSP;
  int n = 0;
  std::vector<int> static_nodes;
  std::vector<int> demands;
  int capacity = 0;

  static RtMeta from_instance(const DynamicInstance& inst);
};

// Iterative prefix-encoding solve: pull a slice, re-encode the buffered
// prefix, point at the most recent slice, commit one action irrevocably.
// No unrevealed information is ever consumed.
Solution rt_solve(FeatureStream& stream, const RtMeta& meta,
                  const ModelParams& params, Strategy strategy = Strategy::GREEDY,
                  std::uint64_t rng_seed = 0);

// Same semantics replayed over a stored instance, recorded on a tape so
// gradients flow through every per-step prefix encoding.
TapedRollout rt_rollout_on_tape(ad::Tape& tape, const ModelBinding& binding,
                                const ModelParams& params,
                                const DynamicInstance& inst, Strategy strategy,
                                std::uint64_t rng_seed);

Solution rt_solve_instance(const DynamicInstance& inst,
                           const ModelParams& params,
                           Strategy strategy = Strategy::GREEDY,
                           std::uint64_t rng_seed = 0);

RunManifest rt_train(const TrainConfig& config);

// Verifies the causality contract on one instance: for every step t, a
// fresh solve with every slice after t replaced by noise must make the
// same decisions up to and including step t.
bool causality_audit(const DynamicInstance& inst, const ModelParams& params,
                     std::uint64_t perturb_seed,
                     std::vector<int>* decisions_out = nullptr);

}  // namespace gta
