#pragma once

// Minimal reverse-mode differentiation over row-major token matrices.
// Rows are tokens (batch-major), columns are features.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace freqprobe::nn {

using Matrix = Eigen::MatrixXf;
using RowVector = Eigen::RowVectorXf;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

struct Var {
  std::size_t id = 0;
};

class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) { nodes_.reserve(512); }

  bool recording() const { return record_; }

  Var constant(Matrix value);
  Var param(Parameter& p);
  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  /// a + row broadcast over every row (row is 1 x cols).
  Var add_row(Var a, Var row);
  /// a + block tiled vertically; a.rows() must be a multiple of block.rows().
  Var add_tiled(Var a, Var block);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var layer_norm(Var a, Var gain, Var bias, float eps = 1e-5f);
  /// Multi-head scaled dot-product attention. q has batch*Lq rows, k and v
  /// batch*Lk rows; causal masks key j > query i within each batch item.
  Var attention(Var q, Var k, Var v, int batch, int heads, bool causal);
  Var dropout(Var a, float rate, std::mt19937_64& rng);
  Var take_rows(Var a, std::vector<Eigen::Index> rows);
  /// a * weight_t + bias with constant operands (used for erasers).
  Var affine(Var a, const Matrix& weight_t, const RowVector& bias);

  /// Propagates `seed` (d out) back through the tape and accumulates into
  /// every Parameter reached.
  void backward(Var out, const Matrix& seed);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Parameter* param = nullptr;
    std::function<void(Tape&, const Matrix&)> back;
  };

  Var push(Matrix value, bool needs_grad);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  void accumulate(Var v, const Matrix& g);
  template <typename Fn>
  void on_backward(Var out, Fn&& fn);

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace freqprobe::nn
