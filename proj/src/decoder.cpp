#include "gta/decoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "gta/errors.hpp"
#include "gta/model.hpp"

namespace gta {

std::string to_string(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::TEMPORAL: return "temporal";
    case DecodeMode::SUM: return "sum";
    case DecodeMode::FIRST_SLICE: return "first_slice";
  }
  return "?";
}

DecodeMode decode_mode_from_string(const std::string& s) {
  if (s == "temporal") return DecodeMode::TEMPORAL;
  if (s == "sum") return DecodeMode::SUM;
  if (s == "first_slice") return DecodeMode::FIRST_SLICE;
  throw ParameterError("unknown decode mode: " + s);
}

ad::Tape::Id temporal_pointer(ad::Tape& tape, ad::Tape::Id h_full, int horizon,
                              int n, int t, DecodeMode mode) {
  if (t < 0) throw ParameterError("temporal_pointer: negative step");
  auto slice_rows = [&](int ts) {
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), ts * n);
    return rows;
  };
  switch (mode) {
    case DecodeMode::TEMPORAL:
      return tape.gather_rows(h_full, slice_rows(std::min(t, horizon - 1)));
    case DecodeMode::FIRST_SLICE:
      return tape.gather_rows(h_full, slice_rows(0));
    case DecodeMode::SUM: {
      ad::Tape::Id acc = tape.gather_rows(h_full, slice_rows(0));
      for (int ts = 1; ts < horizon; ++ts)
        acc = tape.add(acc, tape.gather_rows(h_full, slice_rows(ts)));
      return tape.scale(acc, 1.0 / horizon);
    }
  }
  throw ParameterError("temporal_pointer: bad mode");
}

ad::Tape::Id context_embedding_tsp(ad::Tape& tape, const DecoderBinding& dec,
                                   ad::Tape::Id h_d, std::optional<int> first,
                                   std::optional<int> last) {
  ad::Tape::Id h_first =
      first ? tape.gather_rows(h_d, {*first}) : dec.ph_first;
  ad::Tape::Id h_last = last ? tape.gather_rows(h_d, {*last}) : dec.ph_last;
  ad::Tape::Id h_g = tape.sum_rows(h_d);
  const std::array<ad::Tape::Id, 3> parts{h_first, h_last, h_g};
  return tape.concat_cols(parts);
}

ad::Tape::Id context_embedding_vrp(ad::Tape& tape, const DecoderBinding& dec,
                                   ad::Tape::Id h_d, std::optional<int> last,
                                   double remaining_capacity) {
  ad::Tape::Id h_last = last ? tape.gather_rows(h_d, {*last}) : dec.ph_last;
  ad::Tape::Id r = tape.leaf(Mat::Constant(1, 1, remaining_capacity));
  ad::Tape::Id h_g = tape.sum_rows(h_d);
  const std::array<ad::Tape::Id, 3> parts{h_last, r, h_g};
  return tape.concat_cols(parts);
}

DecodeStepIds decode_step(ad::Tape& tape, const DecoderBinding& dec,
                          ad::Tape::Id h_d, ad::Tape::Id h_c,
                          const std::vector<std::uint8_t>& mask, int num_heads,
                          double clip) {
  if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end())
    throw InvariantViolation("decode_step: every node is masked");
  const int dh = static_cast<int>(tape.val(dec.ck).cols());
  if (dh % num_heads != 0)
    throw ParameterError("decode_step: head count does not divide Dh");
  const int dk = dh / num_heads;

  ad::Tape::Id q = tape.matmul(h_c, dec.cq);   // 1 x Dh
  ad::Tape::Id k = tape.matmul(h_d, dec.ck);   // n x Dh
  ad::Tape::Id v = tape.matmul(h_d, dec.cv);   // n x Dh

  // Invalid nodes are ignored while fusing the context with the node
  // embeddings, and again in the final distribution.
  std::vector<ad::Tape::Id> heads;
  heads.reserve(num_heads);
  for (int m = 0; m < num_heads; ++m) {
    ad::Tape::Id qm = tape.slice_cols(q, m * dk, dk);
    ad::Tape::Id km = tape.slice_cols(k, m * dk, dk);
    ad::Tape::Id vm = tape.slice_cols(v, m * dk, dk);
    ad::Tape::Id scores =
        tape.scale(tape.matmul_nt(qm, km), 1.0 / static_cast<double>(dh));
    ad::Tape::Id attn = tape.softmax_rows(scores, &mask);
    heads.push_back(tape.matmul(attn, vm));
  }
  ad::Tape::Id fused =
      num_heads == 1 ? heads[0] : tape.concat_cols(heads);  // 1 x Dh

  ad::Tape::Id pointed = tape.matmul(h_d, dec.wp);          // n x Dh
  ad::Tape::Id raw = tape.matmul_nt(fused, pointed);        // 1 x n
  ad::Tape::Id logits = tape.scale(tape.tanh(raw), clip);
  ad::Tape::Id log_probs = tape.log_softmax_row(logits, mask);
  return {logits, log_probs};
}

PolicyStep materialize_step(const ad::Tape& tape, const DecodeStepIds& ids,
                            std::vector<std::uint8_t> mask) {
  PolicyStep step;
  step.logits = tape.val(ids.logits).row(0);
  step.log_probs = tape.val(ids.log_probs).row(0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i])
      step.logits(static_cast<Eigen::Index>(i)) =
          -std::numeric_limits<double>::infinity();
  step.mask = std::move(mask);
  return step;
}

namespace {

int argmax_action(const RowVec& log_probs,
                  const std::vector<std::uint8_t>& mask) {
  int best = -1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < log_probs.size(); ++i) {
    if (!mask[i]) continue;
    if (best < 0 || log_probs(i) > best_v) {
      best = i;
      best_v = log_probs(i);
    }
  }
  return best;
}

int sample_action(const RowVec& log_probs,
                  const std::vector<std::uint8_t>& mask, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_valid = -1;
  for (int i = 0; i < log_probs.size(); ++i) {
    if (!mask[i]) continue;
    last_valid = i;
    acc += std::exp(log_probs(i));
    if (u < acc) return i;
  }
  return last_valid;  // guards the tail against rounding in acc
}

struct StepContext {
  ad::Tape::Id h_d;
  DecodeStepIds ids;
};

// Shared per-step decode used by rollout and score_order.
StepContext decode_at(ad::Tape& tape, const ModelBinding& binding,
                      const ModelParams& params, const DynamicInstance& inst,
                      ad::Tape::Id h_full, int step,
                      const std::optional<int>& first,
                      const std::optional<int>& last, long long remaining,
                      const std::vector<std::uint8_t>& mask, DecodeMode mode,
                      ad::Tape::Id* sum_cache) {
  ad::Tape::Id h_d;
  if (mode == DecodeMode::SUM && sum_cache) {
    if (*sum_cache < 0)
      *sum_cache =
          temporal_pointer(tape, h_full, inst.horizon, inst.n, step, mode);
    h_d = *sum_cache;
  } else {
    h_d = temporal_pointer(tape, h_full, inst.horizon, inst.n, step, mode);
  }
  ad::Tape::Id h_c =
      inst.kind == ProblemKind::TSP
          ? context_embedding_tsp(tape, binding.dec, h_d, first, last)
          : context_embedding_vrp(
                tape, binding.dec, h_d, last,
                static_cast<double>(remaining) / inst.capacity);
  DecodeStepIds ids = decode_step(tape, binding.dec, h_d, h_c, mask,
                                  params.config.num_heads, params.dec.clip);
  return {h_d, ids};
}

}  // namespace

TapedRollout rollout_on_tape(ad::Tape& tape, const ModelBinding& binding,
                             const ModelParams& params,
                             const DynamicInstance& inst, DecodeMode mode,
                             Strategy strategy, std::uint64_t rng_seed) {
  ad::Tape::Id x = tape.leaf(inst.features);
  ad::Tape::Id h_full = encode(tape, binding.enc, params.config, x,
                               inst.horizon, inst.n, inst.static_nodes);

  Rng rng(rng_seed);
  RolloutState state = RolloutState::initial(inst);
  std::optional<int> first, last;
  ad::Tape::Id sum_cache = -1;
  ad::Tape::Id lp_total = -1;
  TapedRollout out;

  const int budget = 4 * inst.horizon;
  while (!state.complete(inst)) {
    if (state.step >= budget)
      throw RunawayError("rollout exceeded step budget of 4*horizon");
    std::vector<std::uint8_t> mask = valid_actions(inst, state);
    StepContext sc =
        decode_at(tape, binding, params, inst, h_full, state.step, first, last,
                  state.remaining_capacity, mask, mode, &sum_cache);
    PolicyStep step = materialize_step(tape, sc.ids, mask);
    const int action = strategy == Strategy::GREEDY
                           ? argmax_action(step.log_probs, step.mask)
                           : sample_action(step.log_probs, step.mask, rng);
    ad::Tape::Id lp = tape.pick(sc.ids.log_probs, 0, action);
    lp_total = lp_total < 0 ? lp : tape.add(lp_total, lp);
    out.steps.push_back(std::move(step));
    out.solution.order.push_back(action);
    state.apply(inst, action);
    if (!first) first = action;
    last = action;
  }

  out.log_prob = lp_total;
  out.solution.cost = tour_cost(inst, out.solution.order);
  auto [ok, violations] = is_feasible(inst, out.solution.order);
  out.solution.feasible = ok;
  out.solution.violations = std::move(violations);
  out.solution.log_prob = tape.val(lp_total)(0, 0);
  return out;
}

Solution rollout(const DynamicInstance& inst, const ModelParams& params,
                 DecodeMode mode, Strategy strategy, std::uint64_t rng_seed) {
  ad::Tape tape(/*grad_enabled=*/false);
  ModelBinding binding = ModelBinding::bind(tape, params);
  return rollout_on_tape(tape, binding, params, inst, mode, strategy, rng_seed)
      .solution;
}

namespace {

struct BeamCandidate {
  RolloutState state;
  std::vector<int> order;
  std::optional<int> first, last;
  double log_prob = 0.0;
};

bool beam_better(double lp_a, const std::vector<int>& order_a, double lp_b,
                 const std::vector<int>& order_b) {
  if (lp_a != lp_b) return lp_a > lp_b;
  return order_a < order_b;
}

}  // namespace

Solution beam_search(const DynamicInstance& inst, const ModelParams& params,
                     DecodeMode mode, int width) {
  if (width < 1) throw ParameterError("beam_search: width must be >= 1");
  ad::Tape tape(/*grad_enabled=*/false);
  ModelBinding binding = ModelBinding::bind(tape, params);
  ad::Tape::Id x = tape.leaf(inst.features);
  ad::Tape::Id h_full = encode(tape, binding.enc, params.config, x,
                               inst.horizon, inst.n, inst.static_nodes);
  ad::Tape::Id sum_cache = -1;

  std::vector<BeamCandidate> beam{
      BeamCandidate{RolloutState::initial(inst), {}, {}, {}, 0.0}};
  std::vector<BeamCandidate> finished;
  const int budget = 4 * inst.horizon;

  for (int depth = 0; depth < budget && !beam.empty(); ++depth) {
    std::vector<BeamCandidate> expansions;
    for (const BeamCandidate& cand : beam) {
      std::vector<std::uint8_t> mask = valid_actions(inst, cand.state);
      StepContext sc = decode_at(tape, binding, params, inst, h_full, depth,
                                 cand.first, cand.last,
                                 cand.state.remaining_capacity, mask, mode,
                                 &sum_cache);
      const Mat& lp = tape.val(sc.ids.log_probs);
      for (int j = 0; j < inst.n; ++j) {
        if (!mask[j]) continue;
        BeamCandidate child = cand;
        child.order.push_back(j);
        child.log_prob += lp(0, j);
        child.state.apply(inst, j);
        if (!child.first) child.first = j;
        child.last = j;
        if (child.state.complete(inst))
          finished.push_back(std::move(child));
        else
          expansions.push_back(std::move(child));
      }
    }
    std::sort(expansions.begin(), expansions.end(),
              [](const BeamCandidate& a, const BeamCandidate& b) {
                return beam_better(a.log_prob, a.order, b.log_prob, b.order);
              });
    if (static_cast<int>(expansions.size()) > width)
      expansions.resize(width);
    beam = std::move(expansions);
  }
  if (finished.empty())
    throw RunawayError("beam_search exceeded step budget of 4*horizon");

  const BeamCandidate* best = nullptr;
  for (const BeamCandidate& c : finished)
    if (!best ||
        beam_better(c.log_prob, c.order, best->log_prob, best->order))
      best = &c;

  Solution sol;
  sol.order = best->order;
  sol.log_prob = best->log_prob;

  if (width > 1) {
    // The greedy completion is always a candidate; the returned sequence
    // therefore never scores below the greedy rollout.
    Solution greedy = rollout(inst, params, mode, Strategy::GREEDY, 0);
    if (greedy.log_prob &&
        beam_better(*greedy.log_prob, greedy.order, *sol.log_prob, sol.order))
      sol = std::move(greedy);
  }

  sol.cost = tour_cost(inst, sol.order);
  auto [ok, violations] = is_feasible(inst, sol.order);
  sol.feasible = ok;
  sol.violations = std::move(violations);
  return sol;
}

double score_order(const DynamicInstance& inst, const ModelParams& params,
                   DecodeMode mode, const std::vector<int>& order) {
  ad::Tape tape(/*grad_enabled=*/false);
  ModelBinding binding = ModelBinding::bind(tape, params);
  ad::Tape::Id x = tape.leaf(inst.features);
  ad::Tape::Id h_full = encode(tape, binding.enc, params.config, x,
                               inst.horizon, inst.n, inst.static_nodes);
  ad::Tape::Id sum_cache = -1;

  RolloutState state = RolloutState::initial(inst);
  std::optional<int> first, last;
  double total = 0.0;
  for (int node : order) {
    std::vector<std::uint8_t> mask = valid_actions(inst, state);
    if (node < 0 || node >= inst.n || !mask[node])
      throw ParameterError("score_order: order is not reachable");
    StepContext sc =
        decode_at(tape, binding, params, inst, h_full, state.step, first, last,
                  state.remaining_capacity, mask, mode, &sum_cache);
    total += tape.val(sc.ids.log_probs)(0, node);
    state.apply(inst, node);
    if (!first) first = node;
    last = node;
  }
  return total;
}

}  // namespace gta
