#include <doctest.h>

#include <array>
#include <cmath>

#include "gta/errors.hpp"
#include "gta/tape.hpp"
#include "test_util.hpp"

using gta::Mat;
using gta::ad::Tape;
using gta_test::gradcheck_leaves;

namespace {

Mat random_mat(int rows, int cols, std::uint64_t seed) {
  gta::Rng rng(seed);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_SUITE("tape") {

TEST_CASE("matmul values and gradients") {
  Mat a = random_mat(3, 4, 1), b = random_mat(4, 2, 2);
  Tape tape(true);
  Tape::Id ia = tape.leaf(a), ib = tape.leaf(b);
  Tape::Id prod = tape.matmul(ia, ib);
  CHECK((tape.val(prod) - a * b).norm() == doctest::Approx(0.0));

  const double err = gradcheck_leaves(
      {a, b}, [](Tape& t, const std::vector<Tape::Id>& ids) {
        Tape::Id p = t.matmul(ids[0], ids[1]);
        return t.pick(t.matmul_nt(p, p), 0, 0);
      });
  CHECK(err < 1e-7);
}

TEST_CASE("elementwise and shape ops differentiate") {
  Mat a = random_mat(3, 3, 3), b = random_mat(3, 3, 4), bias = random_mat(1, 3, 5);
  const double err = gradcheck_leaves(
      {a, b, bias}, [](Tape& t, const std::vector<Tape::Id>& ids) {
        Tape::Id s = t.add(t.scale(ids[0], 0.7), ids[1]);
        s = t.add_rowvec(s, ids[2]);
        s = t.sub(s, ids[0]);
        Tape::Id sig = t.sigmoid(s);
        Tape::Id th = t.tanh(s);
        const std::array<Tape::Id, 2> parts{sig, th};
        Tape::Id cat = t.concat_cols(parts);
        Tape::Id sliced = t.slice_cols(cat, 1, 4);
        Tape::Id gathered = t.gather_rows(sliced, {2, 0, 0});
        Tape::Id row = t.sum_rows(gathered);
        return t.pick(t.matmul_nt(row, row), 0, 0);
      });
  CHECK(err < 1e-6);
}

TEST_CASE("concat_rows gradient splits correctly") {
  Mat a = random_mat(2, 3, 6), b = random_mat(1, 3, 7);
  const double err = gradcheck_leaves(
      {a, b}, [](Tape& t, const std::vector<Tape::Id>& ids) {
        const std::array<Tape::Id, 2> parts{ids[0], ids[1]};
        Tape::Id cat = t.concat_rows(parts);
        Tape::Id sq = t.matmul_nt(cat, cat);
        Tape::Id row = t.sum_rows(sq);
        return t.pick(t.matmul_nt(row, row), 0, 0);
      });
  CHECK(err < 1e-6);
}

TEST_CASE("softmax rows sum to one and differentiate") {
  Mat a = random_mat(4, 5, 8);
  Tape tape(true);
  Tape::Id ia = tape.leaf(a);
  Tape::Id sm = tape.softmax_rows(ia);
  for (int r = 0; r < 4; ++r)
    CHECK(tape.val(sm).row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));

  const double err = gradcheck_leaves(
      {a}, [](Tape& t, const std::vector<Tape::Id>& ids) {
        Tape::Id sm = t.softmax_rows(ids[0]);
        Tape::Id w = t.tanh(sm);
        Tape::Id row = t.sum_rows(w);
        return t.pick(t.matmul_nt(row, row), 0, 0);
      });
  CHECK(err < 1e-6);
}

TEST_CASE("masked softmax zeroes masked columns exactly") {
  Mat a = random_mat(2, 4, 9);
  std::vector<std::uint8_t> mask{1, 0, 1, 0};
  Tape tape(true);
  Tape::Id sm = tape.softmax_rows(tape.leaf(a), &mask);
  for (int r = 0; r < 2; ++r) {
    CHECK(tape.val(sm)(r, 1) == 0.0);
    CHECK(tape.val(sm)(r, 3) == 0.0);
    CHECK(tape.val(sm).row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  std::vector<std::uint8_t> none{0, 0, 0, 0};
  CHECK_THROWS_AS(tape.softmax_rows(tape.leaf(a), &none),
                  gta::InvariantViolation);
}

TEST_CASE("log_softmax_row matches softmax and differentiates") {
  Mat a = random_mat(1, 5, 10);
  std::vector<std::uint8_t> mask{1, 1, 0, 1, 1};
  Tape tape(true);
  Tape::Id lsm = tape.log_softmax_row(tape.leaf(a), mask);
  double total = 0.0;
  for (int c = 0; c < 5; ++c) {
    const double p = std::exp(tape.val(lsm)(0, c));
    if (!mask[c]) CHECK(p == 0.0);
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const double err = gradcheck_leaves(
      {a}, [&mask](Tape& t, const std::vector<Tape::Id>& ids) {
        Tape::Id lsm = t.log_softmax_row(ids[0], mask);
        Tape::Id p0 = t.pick(lsm, 0, 0);
        Tape::Id p3 = t.pick(lsm, 0, 3);
        return t.add(t.scale(p0, 1.5), p3);
      });
  CHECK(err < 1e-6);
}

TEST_CASE("backward seeds scale linearly") {
  Mat a = random_mat(2, 2, 11);
  Tape tape(true);
  Tape::Id ia = tape.leaf(a);
  Tape::Id root = tape.pick(tape.tanh(ia), 1, 1);
  tape.backward(root, 2.5);
  Tape tape2(true);
  Tape::Id ia2 = tape2.leaf(a);
  Tape::Id root2 = tape2.pick(tape2.tanh(ia2), 1, 1);
  tape2.backward(root2);
  CHECK((tape.grad(ia) - 2.5 * tape2.grad(ia2)).norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("no-grad tape still computes values") {
  Mat a = random_mat(2, 2, 12);
  Tape tape(false);
  Tape::Id ia = tape.leaf(a);
  Tape::Id s = tape.sigmoid(ia);
  CHECK(tape.val(s).rows() == 2);
  CHECK_THROWS_AS(tape.backward(tape.pick(s, 0, 0)), gta::InvariantViolation);
}

}  // TEST_SUITE
