#include "gta/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "gta/errors.hpp"

namespace gta {

namespace {

Mat uniform_init(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  // U(-1/sqrt(fan_in), 1/sqrt(fan_in)), matching the attention-model
  // convention this architecture extends.
  const double a = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-a, a);
  return m;
}

}  // namespace

int ModelParams::context_rows() const {
  const int dh = config.hidden_dim;
  return kind == ProblemKind::TSP ? 3 * dh : 2 * dh + 1;
}

ModelParams ModelParams::init(ProblemKind kind, const EncoderConfig& cfg,
                              std::uint64_t seed, double clip) {
  cfg.validate();
  ModelParams p;
  p.kind = kind;
  p.config = cfg;
  p.dec.clip = clip;
  const int dh = cfg.hidden_dim;
  Rng rng(seed);

  p.enc.in_w = uniform_init(rng, 2, dh);
  p.enc.in_b = Mat::Zero(1, dh);
  p.enc.layers.resize(cfg.num_layers);
  for (auto& l : p.enc.layers) {
    l.sq = uniform_init(rng, dh, dh);
    l.sk = uniform_init(rng, dh, dh);
    l.sv = uniform_init(rng, dh, dh);
    l.so = uniform_init(rng, dh, dh);
    l.tq = uniform_init(rng, dh, dh);
    l.tk = uniform_init(rng, dh, dh);
    l.tv = uniform_init(rng, dh, dh);
    l.to = uniform_init(rng, dh, dh);
    l.fw = uniform_init(rng, dh, dh);
    l.fb = Mat::Zero(1, dh);
    l.iw = uniform_init(rng, 2 * dh, dh);
  }

  p.dec.cq = uniform_init(rng, p.context_rows(), dh);
  p.dec.ck = uniform_init(rng, dh, dh);
  p.dec.cv = uniform_init(rng, dh, dh);
  p.dec.wp = uniform_init(rng, dh, dh);
  if (kind == ProblemKind::TSP) p.dec.ph_first = uniform_init(rng, 1, dh);
  p.dec.ph_last = uniform_init(rng, 1, dh);
  return p;
}

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  ModelParams z = other;
  z.visit([](const std::string&, Mat& m) { m.setZero(); });
  return z;
}

void ModelParams::visit(
    const std::function<void(const std::string&, Mat&)>& fn) {
  fn("enc.in_w", enc.in_w);
  fn("enc.in_b", enc.in_b);
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    auto& lay = enc.layers[l];
    const std::string p = "enc.l" + std::to_string(l) + ".";
    fn(p + "sq", lay.sq);
    fn(p + "sk", lay.sk);
    fn(p + "sv", lay.sv);
    fn(p + "so", lay.so);
    fn(p + "tq", lay.tq);
    fn(p + "tk", lay.tk);
    fn(p + "tv", lay.tv);
    fn(p + "to", lay.to);
    fn(p + "fw", lay.fw);
    fn(p + "fb", lay.fb);
    fn(p + "iw", lay.iw);
  }
  fn("dec.cq", dec.cq);
  fn("dec.ck", dec.ck);
  fn("dec.cv", dec.cv);
  fn("dec.wp", dec.wp);
  if (kind == ProblemKind::TSP) fn("dec.ph_first", dec.ph_first);
  fn("dec.ph_last", dec.ph_last);
}

void ModelParams::visit(
    const std::function<void(const std::string&, const Mat&)>& fn) const {
  const_cast<ModelParams*>(this)->visit(
      [&fn](const std::string& name, Mat& m) { fn(name, m); });
}

ModelBinding ModelBinding::bind(ad::Tape& tape, const ModelParams& params) {
  ModelBinding b;
  b.enc.in_w = tape.leaf(params.enc.in_w);
  b.enc.in_b = tape.leaf(params.enc.in_b);
  b.enc.layers.reserve(params.enc.layers.size());
  for (const auto& l : params.enc.layers) {
    EncoderLayerBinding lb;
    lb.sq = tape.leaf(l.sq);
    lb.sk = tape.leaf(l.sk);
    lb.sv = tape.leaf(l.sv);
    lb.so = tape.leaf(l.so);
    lb.tq = tape.leaf(l.tq);
    lb.tk = tape.leaf(l.tk);
    lb.tv = tape.leaf(l.tv);
    lb.to = tape.leaf(l.to);
    lb.fw = tape.leaf(l.fw);
    lb.fb = tape.leaf(l.fb);
    lb.iw = tape.leaf(l.iw);
    b.enc.layers.push_back(lb);
  }
  b.dec.cq = tape.leaf(params.dec.cq);
  b.dec.ck = tape.leaf(params.dec.ck);
  b.dec.cv = tape.leaf(params.dec.cv);
  b.dec.wp = tape.leaf(params.dec.wp);
  b.dec.ph_first = params.kind == ProblemKind::TSP
                       ? tape.leaf(params.dec.ph_first)
                       : ad::Tape::Id{-1};
  b.dec.ph_last = tape.leaf(params.dec.ph_last);
  return b;
}

void ModelBinding::accumulate_grads(const ad::Tape& tape,
                                    ModelParams& grads) const {
  grads.enc.in_w += tape.grad(enc.in_w);
  grads.enc.in_b += tape.grad(enc.in_b);
  for (std::size_t l = 0; l < enc.layers.size(); ++l) {
    const auto& lb = enc.layers[l];
    auto& g = grads.enc.layers[l];
    g.sq += tape.grad(lb.sq);
    g.sk += tape.grad(lb.sk);
    g.sv += tape.grad(lb.sv);
    g.so += tape.grad(lb.so);
    g.tq += tape.grad(lb.tq);
    g.tk += tape.grad(lb.tk);
    g.tv += tape.grad(lb.tv);
    g.to += tape.grad(lb.to);
    g.fw += tape.grad(lb.fw);
    g.fb += tape.grad(lb.fb);
    g.iw += tape.grad(lb.iw);
  }
  grads.dec.cq += tape.grad(dec.cq);
  grads.dec.ck += tape.grad(dec.ck);
  grads.dec.cv += tape.grad(dec.cv);
  grads.dec.wp += tape.grad(dec.wp);
  if (dec.ph_first >= 0) grads.dec.ph_first += tape.grad(dec.ph_first);
  grads.dec.ph_last += tape.grad(dec.ph_last);
}

namespace {

constexpr char kMagic[4] = {'G', 'T', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
}

}  // namespace

void save_params(const std::string& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open for writing: " + path);
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  std::uint32_t count = 0;
  params.visit([&count](const std::string&, const Mat&) { ++count; });
  write_pod(out, count);
  params.visit([&out](const std::string& name, const Mat& m) {
    const auto len = static_cast<std::uint32_t>(name.size());
    write_pod(out, len);
    out.write(name.data(), len);
    const std::uint64_t rows = m.rows(), cols = m.cols();
    write_pod(out, rows);
    write_pod(out, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod(out, m(r, c));
  });
  if (!out) throw ParameterError("write failed: " + path);
}

void load_params(const std::string& path, ModelParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open for reading: " + path);
  char magic[4];
  in.read(magic, 4);
  std::uint32_t version = 0, count = 0;
  read_pod(in, version);
  read_pod(in, count);
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || version != kVersion)
    throw ParseError("not a parameter container: " + path);
  std::map<std::string, Mat> tensors;
  for (std::uint32_t k = 0; k < count; ++k) {
    std::uint32_t len = 0;
    read_pod(in, len);
    std::string name(len, '\0');
    in.read(name.data(), len);
    std::uint64_t rows = 0, cols = 0;
    read_pod(in, rows);
    read_pod(in, cols);
    if (!in || rows > (1u << 24) || cols > (1u << 24))
      throw ParseError("corrupt tensor header in " + path);
    Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) read_pod(in, m(r, c));
    tensors.emplace(std::move(name), std::move(m));
  }
  if (!in) throw ParseError("truncated parameter container: " + path);
  params.visit([&tensors, &path](const std::string& name, Mat& m) {
    auto it = tensors.find(name);
    if (it == tensors.end())
      throw ParseError("missing tensor " + name + " in " + path);
    if (it->second.rows() != m.rows() || it->second.cols() != m.cols())
      throw ParseError("tensor " + name + " has unexpected shape in " + path);
    m = it->second;
  });
}

double grad_global_norm(const ModelParams& grads) {
  double sq = 0.0;
  grads.visit([&sq](const std::string&, const Mat& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

void scale_params(ModelParams& grads, double factor) {
  grads.visit([factor](const std::string&, Mat& m) { m *= factor; });
}

}  // namespace gta
