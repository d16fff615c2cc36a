#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gta/encoder.hpp"
#include "gta/instances.hpp"
#include "gta/tape.hpp"

namespace gta {

struct ModelParams;
struct ModelBinding;

// How the decoder reduces the (T, N, Dh) encoder output to one node
// embedding per step: per-step slice, mean over time, or first slice only.
enum class DecodeMode { TEMPORAL, SUM, FIRST_SLICE };

enum class Strategy { GREEDY, SAMPLE };

std::string to_string(DecodeMode mode);
DecodeMode decode_mode_from_string(const std::string& s);

struct DecoderParams {
  Mat cq;        // (K*Dh + e) x Dh context query
  Mat ck, cv;    // Dh x Dh keys/values over node embeddings
  Mat wp;        // Dh x Dh pointing weight
  Mat ph_first;  // 1 x Dh learned step-0 placeholder (TSP only)
  Mat ph_last;   // 1 x Dh learned step-0 placeholder
  double clip = 10.0;
};

struct DecoderBinding {
  ad::Tape::Id cq, ck, cv, wp, ph_first, ph_last;
};

// One decoding step's distribution over nodes. Masked entries carry
// probability exactly zero (logit and log-prob are -inf).
struct PolicyStep {
  std::vector<std::uint8_t> mask;
  RowVec logits;
  RowVec log_probs;
};

// --- decoder operations ------------------------------------------------

// Reduce the full encoder output (rows (t*n + i)) to the step-t node
// embedding (n x Dh). TEMPORAL clamps t to the final slice.
ad::Tape::Id temporal_pointer(ad::Tape& tape, ad::Tape::Id h_full, int horizon,
                              int n, int t, DecodeMode mode);

// first/last == nullopt selects the learned step-0 placeholders.
ad::Tape::Id context_embedding_tsp(ad::Tape& tape, const DecoderBinding& dec,
                                   ad::Tape::Id h_d, std::optional<int> first,
                                   std::optional<int> last);

// remaining_capacity must already be normalized to [0, 1].
ad::Tape::Id context_embedding_vrp(ad::Tape& tape, const DecoderBinding& dec,
                                   ad::Tape::Id h_d, std::optional<int> last,
                                   double remaining_capacity);

struct DecodeStepIds {
  ad::Tape::Id logits;     // 1 x n, before masking
  ad::Tape::Id log_probs;  // 1 x n, masked entries -inf
};

DecodeStepIds decode_step(ad::Tape& tape, const DecoderBinding& dec,
                          ad::Tape::Id h_d, ad::Tape::Id h_c,
                          const std::vector<std::uint8_t>& mask, int num_heads,
                          double clip);

PolicyStep materialize_step(const ad::Tape& tape, const DecodeStepIds& ids,
                            std::vector<std::uint8_t> mask);

// --- rollouts -----------------------------------------------------------

struct TapedRollout {
  Solution solution;
  ad::Tape::Id log_prob = -1;  // cumulative log-likelihood node (1x1)
  std::vector<PolicyStep> steps;
};

// Full-information rollout recorded on an existing tape (used by training;
// gradients flow back through every step when the tape has grads enabled).
TapedRollout rollout_on_tape(ad::Tape& tape, const ModelBinding& binding,
                             const ModelParams& params,
                             const DynamicInstance& inst, DecodeMode mode,
                             Strategy strategy, std::uint64_t rng_seed);

Solution rollout(const DynamicInstance& inst, const ModelParams& params,
                 DecodeMode mode, Strategy strategy, std::uint64_t rng_seed);

// Width-k search over action sequences ranked by cumulative log-likelihood.
// Deterministic: score ties break toward the lexicographically smaller
// sequence. The greedy completion is always kept as a candidate, so the
// returned log-likelihood never falls below the greedy rollout's.
Solution beam_search(const DynamicInstance& inst, const ModelParams& params,
                     DecodeMode mode, int width);

// Cumulative log-likelihood of a fixed order under the policy (replay).
double score_order(const DynamicInstance& inst, const ModelParams& params,
                   DecodeMode mode, const std::vector<int>& order);

}  // namespace gta
