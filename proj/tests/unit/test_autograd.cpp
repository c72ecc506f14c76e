#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "doctest.h"

#include "freqprobe/autograd.hpp"

using namespace freqprobe::nn;

namespace {

using Build = std::function<Var(Tape&, std::vector<Parameter>&)>;

double weighted_sum(const Matrix& out, const Matrix& w) {
  return (out.cast<double>().array() * w.cast<double>().array()).sum();
}

// Compares tape gradients with central differences of sum(out .* w).
void check_gradients(std::vector<Parameter>& params, const Build& build, std::uint64_t seed) {
  Matrix w;
  {
    Tape tape;
    Var out = build(tape, params);
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g;
    w = tape.value(out).unaryExpr([&](float) { return g(rng); });
    for (auto& p : params) p.zero_grad();
    tape.backward(out, w);
  }
  const float h = 1e-2f;
  for (auto& p : params) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      const float keep = p.value.data()[i];
      p.value.data()[i] = keep + h;
      Tape up(false);
      const double fu = weighted_sum(up.value(build(up, params)), w);
      p.value.data()[i] = keep - h;
      Tape down(false);
      const double fd = weighted_sum(down.value(build(down, params)), w);
      p.value.data()[i] = keep;
      const double numeric = (fu - fd) / (2.0 * h);
      const double analytic = p.grad.data()[i];
      CAPTURE(p.name);
      CAPTURE(i);
      CHECK(std::fabs(numeric - analytic) <= 2e-2 * std::max(1.0, std::fabs(numeric)));
    }
  }
}

Parameter make(const char* name, Eigen::Index r, Eigen::Index c, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, scale);
  Parameter p{name, Matrix(r, c), Matrix()};
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = g(rng);
  p.zero_grad();
  return p;
}

}  // namespace

TEST_SUITE("autograd") {

TEST_CASE("dense ops") {
  std::vector<Parameter> ps{make("x", 3, 4, 1), make("w", 4, 5, 2), make("b", 1, 5, 3)};
  check_gradients(ps, [](Tape& t, std::vector<Parameter>& p) {
    Var h = t.add_row(t.matmul(t.param(p[0]), t.param(p[1])), t.param(p[2]));
    return t.add(t.sigmoid(h), t.relu(h));
  }, 10);
}

TEST_CASE("layer norm") {
  std::vector<Parameter> ps{make("x", 4, 6, 4), make("g", 1, 6, 5), make("b", 1, 6, 6)};
  check_gradients(ps, [](Tape& t, std::vector<Parameter>& p) {
    return t.layer_norm(t.param(p[0]), t.param(p[1]), t.param(p[2]));
  }, 11);
}

TEST_CASE("tiled add, row selection and constant affine") {
  std::vector<Parameter> ps{make("x", 6, 3, 7), make("pos", 3, 3, 8)};
  const Matrix wt = Matrix::Random(3, 2);
  const RowVector bias = RowVector::Random(2);
  check_gradients(ps, [&](Tape& t, std::vector<Parameter>& p) {
    Var y = t.add_tiled(t.param(p[0]), t.param(p[1]));
    return t.affine(t.take_rows(y, {0, 2, 2, 5}), wt, bias);
  }, 12);
}

TEST_CASE("attention") {
  for (bool causal : {false, true}) {
    CAPTURE(causal);
    // batch 2, Lq = 3, Lk = 3, width 4 split over 2 heads
    std::vector<Parameter> ps{make("q", 6, 4, 20, 0.7f), make("k", 6, 4, 21, 0.7f),
                              make("v", 6, 4, 22)};
    check_gradients(ps, [causal](Tape& t, std::vector<Parameter>& p) {
      return t.attention(t.param(p[0]), t.param(p[1]), t.param(p[2]), 2, 2, causal);
    }, 13);
  }
}

TEST_CASE("causal attention ignores later keys") {
  Matrix q = Matrix::Random(3, 4), k = Matrix::Random(3, 4), v = Matrix::Random(3, 4);
  Tape a(false);
  const Matrix base = a.value(a.attention(a.constant(q), a.constant(k), a.constant(v), 1, 2, true));
  k.row(2).setRandom();
  v.row(2).setRandom();
  Tape b(false);
  const Matrix moved = b.value(b.attention(b.constant(q), b.constant(k), b.constant(v), 1, 2, true));
  CHECK(base.topRows(2).isApprox(moved.topRows(2)));
  CHECK_FALSE(base.row(2).isApprox(moved.row(2)));
  // The first query sees only the first value row.
  CHECK(base.row(0).isApprox(v.row(0)));
}

TEST_CASE("dropout is identity at rate 0 and rescales survivors") {
  std::mt19937_64 rng(1);
  Tape t;
  const Matrix x = Matrix::Constant(50, 40, 2.0f);
  CHECK(t.value(t.dropout(t.constant(x), 0.0f, rng)) == x);
  const Matrix y = t.value(t.dropout(t.constant(x), 0.5f, rng));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const float v = y.data()[i];
    CHECK((v == 0.0f || v == doctest::Approx(4.0f)));
  }
  CHECK(y.mean() == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("shape errors") {
  Tape t;
  Var a = t.constant(Matrix::Zero(2, 3));
  Var b = t.constant(Matrix::Zero(2, 3));
  CHECK_THROWS_AS(t.matmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.backward(a, Matrix::Zero(3, 3)), std::invalid_argument);
  Tape off(false);
  Var c = off.constant(Matrix::Zero(1, 1));
  CHECK_THROWS_AS(off.backward(c, Matrix::Zero(1, 1)), std::logic_error);
}

}  // TEST_SUITE
