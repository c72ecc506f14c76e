#include "freqprobe/autograd.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace freqprobe::nn {

Var Tape::push(Matrix value, bool needs_grad) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = record_ && needs_grad;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0)
    n.grad = g;
  else
    n.grad += g;
}

template <typename Fn>
void Tape::on_backward(Var out, Fn&& fn) {
  if (nodes_[out.id].needs_grad) nodes_[out.id].back = std::forward<Fn>(fn);
}

Var Tape::constant(Matrix value) { return push(std::move(value), false); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value, true);
  if (record_) nodes_[v.id].param = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  if (value(a).cols() != value(b).rows())
    throw std::invalid_argument("matmul: inner dimensions disagree");
  Var out = push(value(a) * value(b), needs(a) || needs(b));
  on_backward(out, [a, b](Tape& t, const Matrix& g) {
    if (t.needs(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.needs(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
  return out;
}

Var Tape::add(Var a, Var b) {
  if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
    throw std::invalid_argument("add: shapes disagree");
  Var out = push(value(a) + value(b), needs(a) || needs(b));
  on_backward(out, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
  return out;
}

Var Tape::add_row(Var a, Var row) {
  if (value(row).rows() != 1 || value(row).cols() != value(a).cols())
    throw std::invalid_argument("add_row: bias shape disagrees");
  Matrix v = value(a);
  v.rowwise() += value(row).row(0);
  Var out = push(std::move(v), needs(a) || needs(row));
  on_backward(out, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs(row)) t.accumulate(row, g.colwise().sum());
  });
  return out;
}

Var Tape::add_tiled(Var a, Var block) {
  const Eigen::Index L = value(block).rows();
  if (L == 0 || value(a).rows() % L != 0 || value(block).cols() != value(a).cols())
    throw std::invalid_argument("add_tiled: shapes disagree");
  Matrix v = value(a);
  const Eigen::Index reps = v.rows() / L;
  for (Eigen::Index r = 0; r < reps; ++r) v.middleRows(r * L, L) += value(block);
  Var out = push(std::move(v), needs(a) || needs(block));
  on_backward(out, [a, block, L, reps](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs(block)) {
      Matrix sum = Matrix::Zero(L, g.cols());
      for (Eigen::Index r = 0; r < reps; ++r) sum += g.middleRows(r * L, L);
      t.accumulate(block, sum);
    }
  });
  return out;
}

Var Tape::relu(Var a) {
  Var out = push(value(a).cwiseMax(0.0f), needs(a));
  on_backward(out, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, (t.value(a).array() > 0.0f).select(g.array(), 0.0f).matrix());
  });
  return out;
}

Var Tape::sigmoid(Var a) {
  Matrix s = (1.0f + (-value(a).array()).exp()).inverse().matrix();
  Var out = push(std::move(s), needs(a));
  on_backward(out, [a, out](Tape& t, const Matrix& g) {
    const auto& s = t.value(out).array();
    t.accumulate(a, (g.array() * s * (1.0f - s)).matrix());
  });
  return out;
}

Var Tape::layer_norm(Var a, Var gain, Var bias, float eps) {
  const Matrix& x = value(a);
  const Eigen::Index d = x.cols();
  if (value(gain).cols() != d || value(bias).cols() != d)
    throw std::invalid_argument("layer_norm: parameter width disagrees");
  Eigen::VectorXf mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Eigen::VectorXf rstd =
      (centered.array().square().rowwise().mean() + eps).rsqrt().matrix();
  Matrix xhat = (centered.array().colwise() * rstd.array()).matrix();
  Matrix y = (xhat.array().rowwise() * value(gain).row(0).array()).matrix();
  y.rowwise() += value(bias).row(0);
  Var out = push(std::move(y), needs(a) || needs(gain) || needs(bias));
  on_backward(out, [a, gain, bias, xhat = std::move(xhat), rstd = std::move(rstd)](
                       Tape& t, const Matrix& g) {
    if (t.needs(gain)) t.accumulate(gain, (g.array() * xhat.array()).colwise().sum().matrix());
    if (t.needs(bias)) t.accumulate(bias, g.colwise().sum());
    if (t.needs(a)) {
      Matrix dxhat = (g.array().rowwise() * t.value(gain).row(0).array()).matrix();
      Eigen::VectorXf m1 = dxhat.rowwise().mean();
      Eigen::VectorXf m2 = (dxhat.array() * xhat.array()).rowwise().mean();
      Matrix dx = dxhat;
      dx.colwise() -= m1;
      dx.array() -= xhat.array().colwise() * m2.array();
      dx.array().colwise() *= rstd.array();
      t.accumulate(a, dx);
    }
  });
  return out;
}

Var Tape::attention(Var q, Var k, Var v, int batch, int heads, bool causal) {
  const Matrix& Q = value(q);
  const Matrix& K = value(k);
  const Matrix& V = value(v);
  const Eigen::Index d = Q.cols();
  if (batch <= 0 || heads <= 0 || d % heads != 0 || K.cols() != d || V.cols() != d ||
      K.rows() != V.rows() || Q.rows() % batch != 0 || K.rows() % batch != 0)
    throw std::invalid_argument("attention: shapes disagree");
  const Eigen::Index lq = Q.rows() / batch;
  const Eigen::Index lk = K.rows() / batch;
  const Eigen::Index dh = d / heads;
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

  Matrix out(Q.rows(), d);
  const bool keep = record_ && (needs(q) || needs(k) || needs(v));
  std::vector<Matrix> probs;
  if (keep) probs.reserve(static_cast<std::size_t>(batch * heads));
  Matrix s;
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = Q.block(b * lq, h * dh, lq, dh);
      const auto kb = K.block(b * lk, h * dh, lk, dh);
      const auto vb = V.block(b * lk, h * dh, lk, dh);
      s.noalias() = (qb * kb.transpose()) * scale;
      if (causal)
        for (Eigen::Index i = 0; i < lq; ++i)
          for (Eigen::Index j = i + 1; j < lk; ++j)
            s(i, j) = -std::numeric_limits<float>::infinity();
      Eigen::VectorXf mx = s.rowwise().maxCoeff();
      s = (s.colwise() - mx).array().exp().matrix();
      Eigen::VectorXf denom = s.rowwise().sum();
      s.array().colwise() /= denom.array();
      out.block(b * lq, h * dh, lq, dh).noalias() = s * vb;
      if (keep) probs.push_back(s);
    }
  }
  Var o = push(std::move(out), needs(q) || needs(k) || needs(v));
  on_backward(o, [q, k, v, batch, heads, lq, lk, dh, scale,
                  probs = std::move(probs)](Tape& t, const Matrix& g) {
    const Matrix& Q = t.value(q);
    const Matrix& K = t.value(k);
    const Matrix& V = t.value(v);
    Matrix dQ = Matrix::Zero(Q.rows(), Q.cols());
    Matrix dK = Matrix::Zero(K.rows(), K.cols());
    Matrix dV = Matrix::Zero(V.rows(), V.cols());
    Matrix dA, dS;
    for (int b = 0; b < batch; ++b) {
      for (int h = 0; h < heads; ++h) {
        const Matrix& A = probs[static_cast<std::size_t>(b * heads + h)];
        const auto gb = g.block(b * lq, h * dh, lq, dh);
        dA.noalias() = gb * V.block(b * lk, h * dh, lk, dh).transpose();
        dV.block(b * lk, h * dh, lk, dh).noalias() += A.transpose() * gb;
        Eigen::VectorXf rs = (A.array() * dA.array()).rowwise().sum();
        dS = (A.array() * (dA.array().colwise() - rs.array())).matrix() * scale;
        dQ.block(b * lq, h * dh, lq, dh).noalias() += dS * K.block(b * lk, h * dh, lk, dh);
        dK.block(b * lk, h * dh, lk, dh).noalias() +=
            dS.transpose() * Q.block(b * lq, h * dh, lq, dh);
      }
    }
    t.accumulate(q, dQ);
    t.accumulate(k, dK);
    t.accumulate(v, dV);
  });
  return o;
}

Var Tape::dropout(Var a, float rate, std::mt19937_64& rng) {
  if (!record_ || rate <= 0.0f) return a;
  std::bernoulli_distribution keep(1.0 - rate);
  Matrix mask(value(a).rows(), value(a).cols());
  const float scale = 1.0f / (1.0f - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0f;
  Var out = push(value(a).cwiseProduct(mask), needs(a));
  on_backward(out, [a, mask = std::move(mask)](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(mask));
  });
  return out;
}

Var Tape::take_rows(Var a, std::vector<Eigen::Index> rows) {
  const Matrix& x = value(a);
  Matrix v(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  Var out = push(std::move(v), needs(a));
  on_backward(out, [a, rows = std::move(rows)](Tape& t, const Matrix& g) {
    Matrix d = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    for (std::size_t i = 0; i < rows.size(); ++i) d.row(rows[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(a, d);
  });
  return out;
}

Var Tape::affine(Var a, const Matrix& weight_t, const RowVector& bias) {
  if (weight_t.rows() != value(a).cols() || bias.size() != weight_t.cols())
    throw std::invalid_argument("affine: shapes disagree");
  Matrix v = value(a) * weight_t;
  v.rowwise() += bias;
  Var out = push(std::move(v), needs(a));
  on_backward(out, [a, weight_t](Tape& t, const Matrix& g) {
    t.accumulate(a, g * weight_t.transpose());
  });
  return out;
}

void Tape::backward(Var out, const Matrix& seed) {
  if (!record_) throw std::logic_error("backward on a non-recording tape");
  const Matrix& v = value(out);
  if (seed.rows() != v.rows() || seed.cols() != v.cols())
    throw std::invalid_argument("backward: seed shape disagrees with output");
  accumulate(out, seed);
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.back) n.back(*this, n.grad);
    if (n.param != nullptr) {
      if (n.param->grad.size() == 0) n.param->zero_grad();
      n.param->grad += n.grad;
    }
  }
}

}  // namespace freqprobe::nn
