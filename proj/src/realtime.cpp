#include "gta/realtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gta/errors.hpp"

namespace gta {

RtMeta RtMeta::from_instance(const DynamicInstance& inst) {
  return {inst.kind, inst.n, inst.static_nodes, inst.demands, inst.capacity};
}

namespace {

int argmax_row(const RowVec& v, const std::vector<std::uint8_t>& mask) {
  int best = -1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < v.size(); ++i) {
    if (!mask[i]) continue;
    if (best < 0 || v(i) > best_v) {
      best = i;
      best_v = v(i);
    }
  }
  return best;
}

int sample_row(const RowVec& log_probs, const std::vector<std::uint8_t>& mask,
               Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_valid = -1;
  for (int i = 0; i < log_probs.size(); ++i) {
    if (!mask[i]) continue;
    last_valid = i;
    acc += std::exp(log_probs(i));
    if (u < acc) return i;
  }
  return last_valid;
}

struct RtLoopResult {
  std::vector<int> order;
  ad::Tape::Id log_prob = -1;
  std::vector<PolicyStep> steps;
  Mat buffer;  // revealed slices, stacked time-major
  int revealed = 0;
};

// The shared iterative loop. `pull_slice` returns the next revealed slice
// or nullopt when the stream is exhausted.
RtLoopResult rt_loop(ad::Tape& tape, const ModelBinding& binding,
                     const ModelParams& params, const RtMeta& meta,
                     const std::function<std::optional<Mat>()>& pull_slice,
                     Strategy strategy, std::uint64_t rng_seed) {
  DynamicInstance shell;  // carries the problem metadata for masking
  shell.kind = meta.kind;
  shell.n = meta.n;
  shell.demands = meta.demands;
  shell.capacity = meta.capacity;
  shell.static_nodes = meta.static_nodes;

  RtLoopResult out;
  out.buffer.resize(0, 2);
  Rng rng(rng_seed);
  RolloutState state = RolloutState::initial(shell);
  std::optional<int> first, last;
  ad::Tape::Id lp_total = -1;

  const int n = meta.n;
  while (!state.complete(shell)) {
    std::optional<Mat> slice = pull_slice();
    if (!slice)
      throw IncompleteHorizonError(
          "feature stream exhausted before the solution was complete");
    if (slice->rows() != n || slice->cols() != 2)
      throw ParameterError("rt stream slice has wrong shape");
    out.buffer.conservativeResize(out.buffer.rows() + n, 2);
    out.buffer.bottomRows(n) = *slice;
    ++out.revealed;

    // Re-encode the full revealed prefix and point at its newest slice.
    ad::Tape::Id x = tape.leaf(out.buffer);
    ad::Tape::Id h_full = encode(tape, binding.enc, params.config, x,
                                 out.revealed, n, meta.static_nodes);
    ad::Tape::Id h_d = temporal_pointer(tape, h_full, out.revealed, n,
                                        out.revealed - 1, DecodeMode::TEMPORAL);
    ad::Tape::Id h_c =
        meta.kind == ProblemKind::TSP
            ? context_embedding_tsp(tape, binding.dec, h_d, first, last)
            : context_embedding_vrp(
                  tape, binding.dec, h_d, last,
                  static_cast<double>(state.remaining_capacity) /
                      meta.capacity);
    std::vector<std::uint8_t> mask = valid_actions(shell, state);
    DecodeStepIds ids = decode_step(tape, binding.dec, h_d, h_c, mask,
                                    params.config.num_heads, params.dec.clip);
    PolicyStep step = materialize_step(tape, ids, mask);
    const int action = strategy == Strategy::GREEDY
                           ? argmax_row(step.log_probs, step.mask)
                           : sample_row(step.log_probs, step.mask, rng);
    ad::Tape::Id lp = tape.pick(ids.log_probs, 0, action);
    lp_total = lp_total < 0 ? lp : tape.add(lp_total, lp);
    out.steps.push_back(std::move(step));
    out.order.push_back(action);
    state.apply(shell, action);
    if (!first) first = action;
    last = action;
  }

  // TSP closing-edge arrival happens one step after the last decision;
  // reveal that slice (if the stream still has it) for cost accounting.
  if (meta.kind == ProblemKind::TSP) {
    if (std::optional<Mat> extra = pull_slice()) {
      out.buffer.conservativeResize(out.buffer.rows() + n, 2);
      out.buffer.bottomRows(n) = *extra;
      ++out.revealed;
    }
  }
  out.log_prob = lp_total;
  return out;
}

Solution finish_solution(const RtLoopResult& loop, const RtMeta& meta,
                         const ad::Tape& tape) {
  DynamicInstance assembled;
  assembled.kind = meta.kind;
  assembled.n = meta.n;
  assembled.horizon = loop.revealed;
  assembled.features = loop.buffer;
  assembled.static_nodes = meta.static_nodes;
  assembled.demands = meta.demands;
  assembled.capacity = meta.capacity;

  Solution sol;
  sol.order = loop.order;
  sol.cost = tour_cost(assembled, sol.order);
  auto [ok, violations] = is_feasible(assembled, sol.order);
  sol.feasible = ok;
  sol.violations = std::move(violations);
  sol.log_prob = tape.val(loop.log_prob)(0, 0);
  return sol;
}

}  // namespace

Solution rt_solve(FeatureStream& stream, const RtMeta& meta,
                  const ModelParams& params, Strategy strategy,
                  std::uint64_t rng_seed) {
  ad::Tape tape(/*grad_enabled=*/false);
  ModelBinding binding = ModelBinding::bind(tape, params);
  RtLoopResult loop =
      rt_loop(tape, binding, params, meta,
              [&stream]() { return stream.next(); }, strategy, rng_seed);
  return finish_solution(loop, meta, tape);
}

TapedRollout rt_rollout_on_tape(ad::Tape& tape, const ModelBinding& binding,
                                const ModelParams& params,
                                const DynamicInstance& inst, Strategy strategy,
                                std::uint64_t rng_seed) {
  const RtMeta meta = RtMeta::from_instance(inst);
  int pos = 0;
  auto pull = [&inst, &pos]() -> std::optional<Mat> {
    if (pos >= inst.horizon) return std::nullopt;
    return Mat(inst.slice(pos++));
  };
  RtLoopResult loop =
      rt_loop(tape, binding, params, meta, pull, strategy, rng_seed);
  TapedRollout out;
  out.solution = finish_solution(loop, meta, tape);
  out.log_prob = loop.log_prob;
  out.steps = std::move(loop.steps);
  return out;
}

Solution rt_solve_instance(const DynamicInstance& inst,
                           const ModelParams& params, Strategy strategy,
                           std::uint64_t rng_seed) {
  InstanceReplayStream stream(inst);
  return rt_solve(stream, RtMeta::from_instance(inst), params, strategy,
                  rng_seed);
}

RunManifest rt_train(const TrainConfig& cfg) {
  TrainOps ops;
  ops.learner = [](ad::Tape& tape, const ModelBinding& binding,
                   const ModelParams& params, const DynamicInstance& inst,
                   std::uint64_t seed) {
    return rt_rollout_on_tape(tape, binding, params, inst, Strategy::SAMPLE,
                              seed);
  };
  ops.greedy = [](const ModelParams& params, const DynamicInstance& inst) {
    return rt_solve_instance(inst, params, Strategy::GREEDY, 0);
  };
  return train_with_ops(cfg, ops);
}

bool causality_audit(const DynamicInstance& inst, const ModelParams& params,
                     std::uint64_t perturb_seed,
                     std::vector<int>* decisions_out) {
  const Solution base = rt_solve_instance(inst, params, Strategy::GREEDY, 0);
  if (decisions_out) *decisions_out = base.order;
  const int steps = static_cast<int>(base.order.size());
  for (int t = 0; t < steps; ++t) {
    DynamicInstance perturbed = inst;
    Rng rng(derive_seed(perturb_seed, 7, t));
    for (int s = t + 1; s < inst.horizon; ++s) {
      for (int i = 0; i < inst.n; ++i) {
        if (perturbed.is_static_node(i)) continue;
        perturbed.features(static_cast<Eigen::Index>(s) * inst.n + i, 0) =
            rng.uniform();
        perturbed.features(static_cast<Eigen::Index>(s) * inst.n + i, 1) =
            rng.uniform();
      }
    }
    const Solution probe =
        rt_solve_instance(perturbed, params, Strategy::GREEDY, 0);
    for (int s = 0; s <= t && s < steps; ++s)
      if (probe.order.size() <= static_cast<std::size_t>(s) ||
          probe.order[s] != base.order[s])
        return false;
  }
  return true;
}

}  // namespace gta
