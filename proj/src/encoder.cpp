#include "gta/encoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "gta/errors.hpp"

namespace gta {

void EncoderConfig::validate() const {
  if (hidden_dim <= 0 || num_layers < 1 || num_heads < 1)
    throw ParameterError("encoder config fields must be positive");
  if (hidden_dim % num_heads != 0)
    throw ParameterError("hidden_dim must be divisible by num_heads");
}

ad::Tape::Id initial_projection(ad::Tape& tape, const EncoderBinding& enc,
                                ad::Tape::Id x) {
  if (tape.val(x).cols() != tape.val(enc.in_w).rows())
    throw ParameterError("initial_projection: feature arity mismatch");
  return tape.add_rowvec(tape.matmul(x, enc.in_w), enc.in_b);
}

ad::Tape::Id self_attention(ad::Tape& tape, ad::Tape::Id h, ad::Tape::Id wq,
                            ad::Tape::Id wk, ad::Tape::Id wv, ad::Tape::Id wo,
                            int num_heads, const Mat* additive_mask) {
  const int dh = static_cast<int>(tape.val(wq).cols());
  if (dh % num_heads != 0)
    throw ParameterError("self_attention: head count does not divide Dh");
  const int dk = dh / num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  ad::Tape::Id q = tape.matmul(h, wq);
  ad::Tape::Id k = tape.matmul(h, wk);
  ad::Tape::Id v = tape.matmul(h, wv);

  ad::Tape::Id mask_id = -1;
  if (additive_mask) mask_id = tape.leaf(*additive_mask);

  std::vector<ad::Tape::Id> heads;
  heads.reserve(num_heads);
  for (int m = 0; m < num_heads; ++m) {
    ad::Tape::Id qm = tape.slice_cols(q, m * dk, dk);
    ad::Tape::Id km = tape.slice_cols(k, m * dk, dk);
    ad::Tape::Id vm = tape.slice_cols(v, m * dk, dk);
    ad::Tape::Id scores = tape.scale(tape.matmul_nt(qm, km), scale);
    if (mask_id >= 0) scores = tape.add(scores, mask_id);
    ad::Tape::Id attn = tape.softmax_rows(scores);
    heads.push_back(tape.matmul(attn, vm));
  }
  ad::Tape::Id cat = num_heads == 1 ? heads[0] : tape.concat_cols(heads);
  return tape.matmul(cat, wo);
}

ad::Tape::Id spatial_attention(ad::Tape& tape, const EncoderLayerBinding& lb,
                               ad::Tape::Id h_slice, int num_heads,
                               const Mat* adjacency_mask) {
  return self_attention(tape, h_slice, lb.sq, lb.sk, lb.sv, lb.so, num_heads,
                        adjacency_mask);
}

ad::Tape::Id temporal_attention(ad::Tape& tape, const EncoderLayerBinding& lb,
                                ad::Tape::Id h_node, int num_heads) {
  return self_attention(tape, h_node, lb.tq, lb.tk, lb.tv, lb.to, num_heads);
}

ad::Tape::Id static_projection(ad::Tape& tape, const EncoderLayerBinding& lb,
                               ad::Tape::Id h_static) {
  return tape.add_rowvec(tape.matmul(h_static, lb.fw), lb.fb);
}

ad::Tape::Id integrate(ad::Tape& tape, const EncoderLayerBinding& lb,
                       ad::Tape::Id h_s, ad::Tape::Id h_tf) {
  if (tape.val(h_s).rows() != tape.val(h_tf).rows())
    throw ParameterError("integrate: shape mismatch");
  const std::array<ad::Tape::Id, 2> parts{h_s, h_tf};
  return tape.sigmoid(tape.matmul(tape.concat_cols(parts), lb.iw));
}

namespace {

ad::Tape::Id encoder_layer(ad::Tape& tape, const EncoderLayerBinding& lb,
                           const EncoderConfig& cfg, ad::Tape::Id h,
                           int horizon, int n,
                           const std::vector<int>& static_nodes) {
  // Spatial attention, one slice at a time; output stays in (t, i) order.
  std::vector<ad::Tape::Id> slices;
  slices.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    std::vector<int> rows(n);
    std::iota(rows.begin(), rows.end(), t * n);
    ad::Tape::Id ht = tape.gather_rows(h, std::move(rows));
    slices.push_back(spatial_attention(tape, lb, ht, cfg.num_heads));
  }
  ad::Tape::Id h_s = horizon == 1 ? slices[0] : tape.concat_rows(slices);

  std::vector<std::uint8_t> is_static(n, 0);
  for (int u : static_nodes) is_static[u] = 1;
  std::vector<int> dynamic_idx, static_idx;
  for (int i = 0; i < n; ++i)
    (is_static[i] ? static_idx : dynamic_idx).push_back(i);

  // Temporal attention per dynamic node, static projection for the rest;
  // each part contributes a block of `horizon` rows, node-major.
  std::vector<ad::Tape::Id> parts;
  for (int i : dynamic_idx) {
    std::vector<int> rows(horizon);
    for (int t = 0; t < horizon; ++t) rows[t] = t * n + i;
    ad::Tape::Id hi = tape.gather_rows(h, std::move(rows));
    parts.push_back(temporal_attention(tape, lb, hi, cfg.num_heads));
  }
  if (!static_idx.empty()) {
    std::vector<int> rows;
    rows.reserve(static_idx.size() * horizon);
    for (int u : static_idx)
      for (int t = 0; t < horizon; ++t) rows.push_back(t * n + u);
    ad::Tape::Id hu = tape.gather_rows(h, std::move(rows));
    parts.push_back(static_projection(tape, lb, hu));
  }
  ad::Tape::Id blocks = parts.size() == 1 ? parts[0] : tape.concat_rows(parts);

  // Undo the node-major block layout back to (t, i) row order.
  std::vector<int> node_block(n);
  for (std::size_t d = 0; d < dynamic_idx.size(); ++d)
    node_block[dynamic_idx[d]] = static_cast<int>(d);
  for (std::size_t s = 0; s < static_idx.size(); ++s)
    node_block[static_idx[s]] = static_cast<int>(dynamic_idx.size() + s);
  std::vector<int> remap(static_cast<std::size_t>(horizon) * n);
  for (int t = 0; t < horizon; ++t)
    for (int i = 0; i < n; ++i)
      remap[static_cast<std::size_t>(t) * n + i] = node_block[i] * horizon + t;
  ad::Tape::Id h_tf = tape.gather_rows(blocks, std::move(remap));

  return integrate(tape, lb, h_s, h_tf);
}

}  // namespace

ad::Tape::Id encode(ad::Tape& tape, const EncoderBinding& enc,
                    const EncoderConfig& cfg, ad::Tape::Id x, int horizon,
                    int n, const std::vector<int>& static_nodes) {
  cfg.validate();
  if (tape.val(x).rows() != static_cast<Eigen::Index>(horizon) * n)
    throw ParameterError("encode: feature rows != horizon * n");
  ad::Tape::Id h = initial_projection(tape, enc, x);
  for (const auto& lb : enc.layers)
    h = encoder_layer(tape, lb, cfg, h, horizon, n, static_nodes);
  return h;
}

}  // namespace gta
