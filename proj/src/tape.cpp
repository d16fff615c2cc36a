#include "gta/tape.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "gta/errors.hpp"

namespace gta::ad {

Tape::Id Tape::push(Mat value, std::function<void(Tape&)> pull) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) n.pull = std::move(pull);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Mat& Tape::grad_buf(Id id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

Tape::Id Tape::leaf(Mat value) { return push(std::move(value), nullptr); }

Mat Tape::grad(Id id) const {
  const Node& n = nodes_[id];
  if (n.has_grad) return n.grad;
  return Mat::Zero(n.value.rows(), n.value.cols());
}

Tape::Id Tape::matmul(Id a, Id b) {
  Mat v = nodes_[a].value * nodes_[b].value;
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, b, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      t.grad_buf(a).noalias() += g * t.nodes_[b].value.transpose();
      t.grad_buf(b).noalias() += t.nodes_[a].value.transpose() * g;
    };
  }
  return out;
}

Tape::Id Tape::matmul_nt(Id a, Id b) {
  Mat v = nodes_[a].value * nodes_[b].value.transpose();
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, b, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      t.grad_buf(a).noalias() += g * t.nodes_[b].value;
      t.grad_buf(b).noalias() += g.transpose() * t.nodes_[a].value;
    };
  }
  return out;
}

Tape::Id Tape::add(Id a, Id b) {
  Mat v = nodes_[a].value + nodes_[b].value;
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, b, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      t.grad_buf(a) += g;
      t.grad_buf(b) += g;
    };
  }
  return out;
}

Tape::Id Tape::sub(Id a, Id b) {
  Mat v = nodes_[a].value - nodes_[b].value;
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, b, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      t.grad_buf(a) += g;
      t.grad_buf(b) -= g;
    };
  }
  return out;
}

Tape::Id Tape::scale(Id a, double s) {
  Mat v = nodes_[a].value * s;
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, s, out](Tape& t) {
      t.grad_buf(a) += t.nodes_[out].grad * s;
    };
  }
  return out;
}

Tape::Id Tape::add_rowvec(Id a, Id bias) {
  Mat v = nodes_[a].value;
  v.rowwise() += Eigen::RowVectorXd(nodes_[bias].value.row(0));
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, bias, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      t.grad_buf(a) += g;
      t.grad_buf(bias) += g.colwise().sum();
    };
  }
  return out;
}

Tape::Id Tape::concat_cols(std::span<const Id> parts) {
  Eigen::Index rows = nodes_[parts[0]].value.rows();
  Eigen::Index cols = 0;
  for (Id p : parts) cols += nodes_[p].value.cols();
  Mat v(rows, cols);
  Eigen::Index off = 0;
  for (Id p : parts) {
    const Mat& pv = nodes_[p].value;
    v.middleCols(off, pv.cols()) = pv;
    off += pv.cols();
  }
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    std::vector<Id> ps(parts.begin(), parts.end());
    nodes_[out].pull = [ps, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      Eigen::Index off = 0;
      for (Id p : ps) {
        Eigen::Index w = t.nodes_[p].value.cols();
        t.grad_buf(p) += g.middleCols(off, w);
        off += w;
      }
    };
  }
  return out;
}

Tape::Id Tape::concat_rows(std::span<const Id> parts) {
  Eigen::Index cols = nodes_[parts[0]].value.cols();
  Eigen::Index rows = 0;
  for (Id p : parts) rows += nodes_[p].value.rows();
  Mat v(rows, cols);
  Eigen::Index off = 0;
  for (Id p : parts) {
    const Mat& pv = nodes_[p].value;
    v.middleRows(off, pv.rows()) = pv;
    off += pv.rows();
  }
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    std::vector<Id> ps(parts.begin(), parts.end());
    nodes_[out].pull = [ps, out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      Eigen::Index off = 0;
      for (Id p : ps) {
        Eigen::Index h = t.nodes_[p].value.rows();
        t.grad_buf(p) += g.middleRows(off, h);
        off += h;
      }
    };
  }
  return out;
}

Tape::Id Tape::slice_cols(Id a, int start, int len) {
  Mat v = nodes_[a].value.middleCols(start, len);
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, start, len, out](Tape& t) {
      t.grad_buf(a).middleCols(start, len) += t.nodes_[out].grad;
    };
  }
  return out;
}

Tape::Id Tape::gather_rows(Id a, std::vector<int> rows) {
  const Mat& av = nodes_[a].value;
  Mat v(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) v.row(r) = av.row(rows[r]);
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, rows = std::move(rows), out](Tape& t) {
      const Mat& g = t.nodes_[out].grad;
      Mat& ga = t.grad_buf(a);
      for (std::size_t r = 0; r < rows.size(); ++r) ga.row(rows[r]) += g.row(r);
    };
  }
  return out;
}

Tape::Id Tape::sum_rows(Id a) {
  Mat v = nodes_[a].value.colwise().sum();
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, out](Tape& t) {
      t.grad_buf(a).rowwise() +=
          Eigen::RowVectorXd(t.nodes_[out].grad.row(0));
    };
  }
  return out;
}

Tape::Id Tape::sigmoid(Id a) {
  Mat v = (1.0 / (1.0 + (-nodes_[a].value.array()).exp())).matrix();
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, out](Tape& t) {
      const Mat& y = t.nodes_[out].value;
      t.grad_buf(a).array() +=
          t.nodes_[out].grad.array() * y.array() * (1.0 - y.array());
    };
  }
  return out;
}

Tape::Id Tape::tanh(Id a) {
  Mat v = nodes_[a].value.array().tanh().matrix();
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, out](Tape& t) {
      const Mat& y = t.nodes_[out].value;
      t.grad_buf(a).array() +=
          t.nodes_[out].grad.array() * (1.0 - y.array().square());
    };
  }
  return out;
}

Tape::Id Tape::softmax_rows(Id a, const std::vector<std::uint8_t>* col_mask) {
  const Mat& x = nodes_[a].value;
  std::vector<std::uint8_t> mask;
  if (col_mask) mask = *col_mask;
  Mat y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (mask.empty() || mask[c]) mx = std::max(mx, x(r, c));
    if (!std::isfinite(mx))
      throw InvariantViolation("softmax row has every column masked");
    double z = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (mask.empty() || mask[c]) {
        y(r, c) = std::exp(x(r, c) - mx);
        z += y(r, c);
      } else {
        y(r, c) = 0.0;
      }
    }
    y.row(r) /= z;
  }
  Id out = push(std::move(y), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, out](Tape& t) {
      const Mat& y = t.nodes_[out].value;
      const Mat& g = t.nodes_[out].grad;
      Mat& ga = t.grad_buf(a);
      for (Eigen::Index r = 0; r < y.rows(); ++r) {
        double dot = g.row(r).dot(y.row(r));
        ga.row(r).array() += y.row(r).array() * (g.row(r).array() - dot);
      }
    };
  }
  return out;
}

Tape::Id Tape::log_softmax_row(Id a, const std::vector<std::uint8_t>& mask) {
  const Mat& x = nodes_[a].value;
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    if (mask[c]) mx = std::max(mx, x(0, c));
  if (!std::isfinite(mx))
    throw InvariantViolation("log_softmax row has every column masked");
  double z = 0.0;
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    if (mask[c]) z += std::exp(x(0, c) - mx);
  const double log_z = mx + std::log(z);
  Mat y(1, x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    y(0, c) = mask[c] ? x(0, c) - log_z
                      : -std::numeric_limits<double>::infinity();
  Id out = push(std::move(y), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, mask, out](Tape& t) {
      const Mat& y = t.nodes_[out].value;
      const Mat& g = t.nodes_[out].grad;
      double gsum = 0.0;
      for (Eigen::Index c = 0; c < y.cols(); ++c)
        if (mask[c]) gsum += g(0, c);
      Mat& ga = t.grad_buf(a);
      for (Eigen::Index c = 0; c < y.cols(); ++c)
        if (mask[c]) ga(0, c) += g(0, c) - std::exp(y(0, c)) * gsum;
    };
  }
  return out;
}

Tape::Id Tape::pick(Id a, int r, int c) {
  Mat v(1, 1);
  v(0, 0) = nodes_[a].value(r, c);
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, r, c, out](Tape& t) {
      t.grad_buf(a)(r, c) += t.nodes_[out].grad(0, 0);
    };
  }
  return out;
}

Tape::Id Tape::dot(Id a, Id b) {
  if (nodes_[a].value.rows() != nodes_[b].value.rows() ||
      nodes_[a].value.cols() != nodes_[b].value.cols())
    throw InvariantViolation("dot: shape mismatch");
  Mat v(1, 1);
  v(0, 0) = nodes_[a].value.cwiseProduct(nodes_[b].value).sum();
  Id out = push(std::move(v), nullptr);
  if (grad_enabled_) {
    nodes_[out].pull = [a, b, out](Tape& t) {
      const double g = t.nodes_[out].grad(0, 0);
      t.grad_buf(a) += g * t.nodes_[b].value;
      t.grad_buf(b) += g * t.nodes_[a].value;
    };
  }
  return out;
}

void Tape::backward(Id root, double seed_grad) {
  if (!grad_enabled_)
    throw InvariantViolation("backward() on a no-grad tape");
  if (nodes_[root].value.size() != 1)
    throw InvariantViolation("backward() root must be 1x1");
  grad_buf(root)(0, 0) += seed_grad;
  for (Id id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.has_grad && n.pull) n.pull(*this);
  }
}

}  // namespace gta::ad
