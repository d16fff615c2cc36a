#pragma once

#include <vector>

#include "gta/tape.hpp"
#include "gta/tensor.hpp"

namespace gta {

struct EncoderConfig {
  int hidden_dim = 128;
  int num_layers = 3;
  int num_heads = 8;

  void validate() const;
  int head_dim() const { return hidden_dim / num_heads; }
};

// All learnable tensors of one encoder layer. Weight matrices are stored
// input-rows x output-cols so a row-major activation H maps as H * W.
struct EncoderLayerParams {
  Mat sq, sk, sv, so;  // spatial attention q/k/v and head-combining proj
  Mat tq, tk, tv, to;  // temporal attention q/k/v and head-combining proj
  Mat fw, fb;          // static-node affine map
  Mat iw;              // integration weight, (2*Dh) x Dh, no bias
};

struct EncoderParams {
  Mat in_w, in_b;  // input projection, D x Dh affine
  std::vector<EncoderLayerParams> layers;
};

// Tape ids of one layer's parameters; see ModelBinding.
struct EncoderLayerBinding {
  ad::Tape::Id sq, sk, sv, so, tq, tk, tv, to, fw, fb, iw;
};

struct EncoderBinding {
  ad::Tape::Id in_w, in_b;
  std::vector<EncoderLayerBinding> layers;
};

// --- encoder operations (all build onto the tape) ---------------------

ad::Tape::Id initial_projection(ad::Tape& tape, const EncoderBinding& enc,
                                ad::Tape::Id x);

// Multi-head self attention over the rows of `h` (S x Dh). Scores are
// scaled by 1/sqrt(Dh). `additive_mask` (S x S), when present, is added to
// every head's scores before the softmax; use -inf for non-adjacent pairs.
ad::Tape::Id self_attention(ad::Tape& tape, ad::Tape::Id h, ad::Tape::Id wq,
                            ad::Tape::Id wk, ad::Tape::Id wv, ad::Tape::Id wo,
                            int num_heads, const Mat* additive_mask = nullptr);

ad::Tape::Id spatial_attention(ad::Tape& tape, const EncoderLayerBinding& lb,
                               ad::Tape::Id h_slice, int num_heads,
                               const Mat* adjacency_mask = nullptr);

ad::Tape::Id temporal_attention(ad::Tape& tape, const EncoderLayerBinding& lb,
                                ad::Tape::Id h_node, int num_heads);

ad::Tape::Id static_projection(ad::Tape& tape, const EncoderLayerBinding& lb,
                               ad::Tape::Id h_static);

ad::Tape::Id integrate(ad::Tape& tape, const EncoderLayerBinding& lb,
                       ad::Tape::Id h_s, ad::Tape::Id h_tf);

// Full encoder: input projection followed by the stacked layers. `x` holds
// the flattened features, row (t*n + i); the result has the same layout
// with hidden_dim columns.
ad::Tape::Id encode(ad::Tape& tape, const EncoderBinding& enc,
                    const EncoderConfig& cfg, ad::Tape::Id x, int horizon,
                    int n, const std::vector<int>& static_nodes);

}  // namespace gta
