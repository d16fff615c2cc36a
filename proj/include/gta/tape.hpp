#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gta/tensor.hpp"

namespace gta::ad {

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape records operations as they execute; nodes are created in
// topological order by construction, so backward() is a single reverse
// sweep. One tape per rollout; parameters enter as leaves and their
// gradients are read back after backward().
//
// With grad_enabled == false the tape still stores values (ops need their
// inputs) but records no pull closures, which makes inference cheap.
class Tape {
 public:
  using Id = std::int32_t;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  Id leaf(Mat value);

  const Mat& val(Id id) const { return nodes_[id].value; }
  // Gradient of the last backward() root w.r.t. node `id`. Zero matrix if
  // the node does not influence the root.
  Mat grad(Id id) const;

  // --- operations ---------------------------------------------------
  Id matmul(Id a, Id b);     // A * B
  Id matmul_nt(Id a, Id b);  // A * B^T
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id scale(Id a, double s);
  Id add_rowvec(Id a, Id bias);  // bias is 1 x cols, broadcast over rows
  Id concat_cols(std::span<const Id> parts);
  Id concat_rows(std::span<const Id> parts);
  Id slice_cols(Id a, int start, int len);
  Id gather_rows(Id a, std::vector<int> rows);
  Id sum_rows(Id a);  // 1 x cols
  Id sigmoid(Id a);
  Id tanh(Id a);
  // Row-wise softmax. Masked columns (mask value 0) get probability exactly
  // zero. Throws InvariantViolation if any row has every column masked.
  Id softmax_rows(Id a, const std::vector<std::uint8_t>* col_mask = nullptr);
  // Log-softmax of a 1 x N row with masking; masked entries are -inf.
  Id log_softmax_row(Id a, const std::vector<std::uint8_t>& mask);
  Id pick(Id a, int r, int c);  // 1 x 1
  Id dot(Id a, Id b);           // sum of the elementwise product, 1 x 1

  // Backward pass from a 1x1 root node, seeding d(root) = seed_grad.
  void backward(Id root, double seed_grad = 1.0);

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool has_grad = false;
    std::function<void(Tape&)> pull;
  };

  Id push(Mat value, std::function<void(Tape&)> pull);
  Mat& grad_buf(Id id);

  std::vector<Node> nodes_;
  bool grad_enabled_;
};

}  // namespace gta::ad
