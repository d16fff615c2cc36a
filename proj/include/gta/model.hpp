#pragma once

#include <functional>
#include <string>

#include "gta/decoder.hpp"
#include "gta/encoder.hpp"
#include "gta/instances.hpp"
#include "gta/tape.hpp"

namespace gta {

// Every learnable tensor of the network. The context-query shape and the
// set of step-0 placeholders depend on the problem kind, so a ModelParams
// is built for one kind (weights are independent of instance size).
struct ModelParams {
  ProblemKind kind = ProblemKind::TSP;
  EncoderConfig config;
  EncoderParams enc;
  DecoderParams dec;

  static ModelParams init(ProblemKind kind, const EncoderConfig& cfg,
                          std::uint64_t seed, double clip = 10.0);
  static ModelParams zeros_like(const ModelParams& other);

  // Visits every tensor in a stable order (serialization, optimizer state
  // and gradient accumulation all share it).
  void visit(const std::function<void(const std::string&, Mat&)>& fn);
  void visit(const std::function<void(const std::string&, const Mat&)>& fn) const;

  int context_rows() const;  // K*Dh + e for this problem kind
};

struct ModelBinding {
  EncoderBinding enc;
  DecoderBinding dec;

  static ModelBinding bind(ad::Tape& tape, const ModelParams& params);
  // Adds the tape's parameter gradients into `grads` (shaped like params).
  void accumulate_grads(const ad::Tape& tape, ModelParams& grads) const;
};

// Tensor container + helpers; the sidecar JSON manifest is handled by the
// training module.
void save_params(const std::string& path, const ModelParams& params);
void load_params(const std::string& path, ModelParams& params);

double grad_global_norm(const ModelParams& grads);
void scale_params(ModelParams& grads, double factor);

}  // namespace gta
