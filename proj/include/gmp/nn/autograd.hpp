#pragma once

#include <deque>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmp/nn/kernels.hpp"

namespace gmp::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value

  Eigen::Index size() const { return value.size(); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  int id() const { return id_; }
  Tape& tape() const { return *tape_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode tape. A tape records one forward computation; backward()
// walks it once and accumulates into Parameter::grad. A non-recording tape
// keeps values only (evaluation mode).
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return recording_; }

  // Training-mode dropout used by dropout(); rate 0 or no rng disables it.
  void set_dropout(double rate, std::mt19937_64* rng) {
    dropout_rate_ = rate;
    dropout_rng_ = rng;
  }
  double dropout_rate() const { return dropout_rng_ ? dropout_rate_ : 0.0; }
  bool training() const { return dropout_rng_ != nullptr; }
  std::mt19937_64& dropout_rng() { return *dropout_rng_; }

  Var constant(Matrix value);
  // One node per parameter per tape; repeated calls return the same Var.
  Var param(Parameter& p);

  const Matrix& value(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  // Gradient buffer of a node, zero-initialised on first access.
  Matrix& grad(int id);

  // Pushes an op result. `backward` is dropped when no input requires grad.
  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var push(Matrix value, std::span<const Var> inputs, Backward backward);

  // Seeds d(root)/d(root) = seed and propagates to every parameter.
  void backward(Var root, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Parameter* param = nullptr;
    Matrix grad;
    Backward backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  bool recording_;
  double dropout_rate_ = 0.0;
  std::mt19937_64* dropout_rng_ = nullptr;
};

// ---- differentiable ops -------------------------------------------------

Var matmul(Var a, Var b);                    // a * b
Var matmul_nt(Var a, Var b);                 // a * b^T
Var add(Var a, Var b);                       // same shapes
Var add_row(Var x, Var row);                 // x + broadcast(row), row is 1 x cols
Var add_constant(Var x, const Matrix& c);    // x + c, c not differentiated
Var scale(Var x, double s);
Var add_scaled(Var a, Var b, double s);      // a + s * b
Var affine(Var x, Var w, Var b);             // x * w + broadcast(b)
Var gelu(Var x);
// Inverted dropout at the tape's rate; identity when the tape has none.
Var dropout(Var x);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

// Multi-head scaled dot-product attention. q: Lq x d, k/v: Lk x d. With
// `causal`, query i sees keys j <= i + (Lk - Lq). Lk == 0 yields zeros.
Var attention(Var q, Var k, Var v, int heads, bool causal);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(Var a, Var b);
Var slice_rows(Var x, Eigen::Index start, Eigen::Index count);
Var gather_rows(Var table, std::span<const int> rows);
Var mean_rows(Var x);                        // 1 x cols
Var repeat_rows(Var row, Eigen::Index times);
Var reshape(Var x, Eigen::Index rows, Eigen::Index cols);  // row-major reinterpretation

// Mean over rows of -log softmax(logits_i)[targets_i]; 1 x 1.
Var cross_entropy(Var logits, std::span<const int> targets);

inline double scalar(Var v) { return v.value()(0, 0); }

}  // namespace gmp::nn
