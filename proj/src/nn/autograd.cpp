#include "gmp/nn/autograd.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "gmp/errors.hpp"

namespace gmp::nn {

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  Node node;
  node.external = &p.value;
  node.param = &p;
  node.requires_grad = recording_;
  nodes_.push_back(std::move(node));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

const Matrix& Tape::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.external != nullptr ? *n.external : n.value;
}

Matrix& Tape::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  const Matrix& v = n.external != nullptr ? *n.external : n.value;
  if (n.grad.rows() != v.rows() || n.grad.cols() != v.cols()) n.grad.setZero(v.rows(), v.cols());
  return n.grad;
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return push(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
              std::move(backward));
}

Var Tape::push(Matrix value, std::span<const Var> inputs, Backward backward) {
  Node node;
  node.value = std::move(value);
  if (recording_) {
    for (const Var& in : inputs) {
      if (in.valid() && requires_grad(in.id())) {
        node.requires_grad = true;
        break;
      }
    }
    if (node.requires_grad) node.backward = std::move(backward);
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::backward(Var root, double seed) {
  if (!recording_) throw std::logic_error("backward on a non-recording tape");
  grad(root.id()).array() += seed;
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, id);
  }
  for (Node& n : nodes_) {
    if (n.param != nullptr && n.grad.size() > 0) n.param->grad += n.grad;
  }
}

namespace {

bool needs(const Var& v) { return v.valid() && v.tape().requires_grad(v.id()); }

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
  Matrix out;
  gemm_nn(a.value(), b.value(), out);
  return a.tape().push(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(a)) gemm_nt(g, b.value(), t.grad(a.id()), true);
    if (needs(b)) gemm_tn(a.value(), g, t.grad(b.id()), true);
  });
}

Var matmul_nt(Var a, Var b) {
  if (a.cols() != b.cols()) throw DimensionError("matmul_nt: inner dimensions differ");
  Matrix out;
  gemm_nt(a.value(), b.value(), out);
  return a.tape().push(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(a)) gemm_nn(g, b.value(), t.grad(a.id()), true);
    if (needs(b)) gemm_tn(g, a.value(), t.grad(b.id()), true);
  });
}

Var add(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "add");
  Matrix out = a.value() + b.value();
  return a.tape().push(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(a)) t.grad(a.id()) += g;
    if (needs(b)) t.grad(b.id()) += g;
  });
}

Var add_row(Var x, Var row) {
  if (row.rows() != 1 || row.cols() != x.cols()) throw DimensionError("add_row: bad row shape");
  Matrix out = x.value();
  out.rowwise() += row.value().row(0);
  return x.tape().push(std::move(out), {x, row}, [x, row](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(x)) t.grad(x.id()) += g;
    if (needs(row)) t.grad(row.id()) += g.colwise().sum();
  });
}

Var add_constant(Var x, const Matrix& c) {
  check_same_shape(x.value(), c, "add_constant");
  Matrix out = x.value() + c;
  return x.tape().push(std::move(out), {x}, [x](Tape& t, int self) {
    t.grad(x.id()) += t.grad(self);
  });
}

Var scale(Var x, double s) {
  Matrix out = x.value() * s;
  return x.tape().push(std::move(out), {x}, [x, s](Tape& t, int self) {
    t.grad(x.id()) += t.grad(self) * s;
  });
}

Var add_scaled(Var a, Var b, double s) {
  check_same_shape(a.value(), b.value(), "add_scaled");
  Matrix out = a.value() + s * b.value();
  return a.tape().push(std::move(out), {a, b}, [a, b, s](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(a)) t.grad(a.id()) += g;
    if (needs(b)) t.grad(b.id()) += s * g;
  });
}

Var affine(Var x, Var w, Var b) {
  if (x.cols() != w.rows()) throw DimensionError("affine: input width does not match weights");
  if (b.rows() != 1 || b.cols() != w.cols()) throw DimensionError("affine: bad bias shape");
  Matrix out;
  gemm_nn(x.value(), w.value(), out);
  out.rowwise() += b.value().row(0);
  return x.tape().push(std::move(out), {x, w, b}, [x, w, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(x)) gemm_nt(g, w.value(), t.grad(x.id()), true);
    if (needs(w)) gemm_tn(x.value(), g, t.grad(w.id()), true);
    if (needs(b)) t.grad(b.id()) += g.colwise().sum();
  });
}

Var gelu(Var x) {
  const Matrix& in = x.value();
  Matrix out(in.rows(), in.cols());
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    const double v = in.data()[i];
    out.data()[i] = 0.5 * v * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
  }
  return x.tape().push(std::move(out), {x}, [x](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Matrix& in = x.value();
    Matrix& gx = t.grad(x.id());
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (Eigen::Index i = 0; i < in.size(); ++i) {
      const double v = in.data()[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      gx.data()[i] += g.data()[i] * (cdf + v * pdf);
    }
  });
}

Var dropout(Var x) {
  Tape& tape = x.tape();
  const double rate = tape.dropout_rate();
  if (rate <= 0.0) return x;
  const Matrix& in = x.value();
  auto mask = std::make_shared<Matrix>(in.rows(), in.cols());
  std::bernoulli_distribution keep(1.0 - rate);
  const double kept = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask->size(); ++i) {
    mask->data()[i] = keep(tape.dropout_rng()) ? kept : 0.0;
  }
  Matrix out = in.cwiseProduct(*mask);
  return tape.push(std::move(out), {x}, [x, mask](Tape& t, int self) {
    t.grad(x.id()) += t.grad(self).cwiseProduct(*mask);
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Matrix& in = x.value();
  const Eigen::Index n = in.cols();
  if (gain.cols() != n || bias.cols() != n) throw DimensionError("layer_norm: bad gain/bias");
  auto xhat = std::make_shared<Matrix>(in.rows(), n);
  auto inv = std::make_shared<Eigen::VectorXd>(in.rows());
  Matrix out(in.rows(), n);
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    // Plain loops keep the reduction order independent of row alignment.
    double mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) mean += in(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) var += (in(i, j) - mean) * (in(i, j) - mean);
    var /= static_cast<double>(n);
    const double s = 1.0 / std::sqrt(var + eps);
    (*inv)(i) = s;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double xh = (in(i, j) - mean) * s;
      (*xhat)(i, j) = xh;
      out(i, j) = xh * gain.value()(0, j) + bias.value()(0, j);
    }
  }
  return x.tape().push(std::move(out), {x, gain, bias}, [x, gain, bias, xhat, inv](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    const Eigen::Index n = g.cols();
    if (needs(gain)) t.grad(gain.id()) += g.cwiseProduct(*xhat).colwise().sum();
    if (needs(bias)) t.grad(bias.id()) += g.colwise().sum();
    if (needs(x)) {
      Matrix& gx = t.grad(x.id());
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        Eigen::RowVectorXd dxhat = g.row(i).cwiseProduct(gain.value().row(0));
        const double m1 = dxhat.sum() / static_cast<double>(n);
        const double m2 = dxhat.dot(xhat->row(i)) / static_cast<double>(n);
        gx.row(i).array() += (*inv)(i) * (dxhat.array() - m1 - xhat->row(i).array() * m2);
      }
    }
  });
}

Var attention(Var q, Var k, Var v, int heads, bool causal) {
  const Matrix& Q = q.value();
  const Matrix& K = k.value();
  const Matrix& V = v.value();
  const Eigen::Index lq = Q.rows(), lk = K.rows(), d = Q.cols();
  if (K.cols() != d || V.cols() != d || V.rows() != lk) throw DimensionError("attention: shapes");
  if (heads <= 0 || d % heads != 0) throw DimensionError("attention: width not divisible by heads");
  const Eigen::Index dh = d / heads;
  const double scl = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index offset = lk - lq;
  auto limit = [=](Eigen::Index i) { return causal ? std::min(lk, i + offset + 1) : lk; };

  auto probs = std::make_shared<std::vector<Matrix>>(static_cast<std::size_t>(heads));
  Matrix out = Matrix::Zero(lq, d);
  for (int h = 0; h < heads; ++h) {
    Matrix& P = (*probs)[static_cast<std::size_t>(h)];
    P.setZero(lq, lk);
    const Eigen::Index c0 = h * dh;
    for (Eigen::Index i = 0; i < lq; ++i) {
      const Eigen::Index lim = limit(i);
      if (lim <= 0) continue;
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < lim; ++j) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < dh; ++c) s += Q(i, c0 + c) * K(j, c0 + c);
        s *= scl;
        P(i, j) = s;
        mx = std::max(mx, s);
      }
      double z = 0.0;
      for (Eigen::Index j = 0; j < lim; ++j) {
        P(i, j) = std::exp(P(i, j) - mx);
        z += P(i, j);
      }
      for (Eigen::Index j = 0; j < lim; ++j) {
        P(i, j) /= z;
        const double p = P(i, j);
        for (Eigen::Index c = 0; c < dh; ++c) out(i, c0 + c) += p * V(j, c0 + c);
      }
    }
  }
  return q.tape().push(std::move(out), {q, k, v}, [q, k, v, heads, probs, causal, offset](Tape& t, int self) {
    const Matrix& G = t.grad(self);
    const Matrix& Q = q.value();
    const Matrix& K = k.value();
    const Matrix& V = v.value();
    const Eigen::Index lq = Q.rows(), lk = K.rows(), d = Q.cols();
    const Eigen::Index dh = d / heads;
    const double scl = 1.0 / std::sqrt(static_cast<double>(dh));
    Matrix* gq = needs(q) ? &t.grad(q.id()) : nullptr;
    Matrix* gk = needs(k) ? &t.grad(k.id()) : nullptr;
    Matrix* gv = needs(v) ? &t.grad(v.id()) : nullptr;
    Eigen::VectorXd dp(lk);
    for (int h = 0; h < heads; ++h) {
      const Matrix& P = (*probs)[static_cast<std::size_t>(h)];
      const Eigen::Index c0 = h * dh;
      for (Eigen::Index i = 0; i < lq; ++i) {
        const Eigen::Index lim = causal ? std::min(lk, i + offset + 1) : lk;
        if (lim <= 0) continue;
        double dot = 0.0;
        for (Eigen::Index j = 0; j < lim; ++j) {
          double s = 0.0;
          for (Eigen::Index c = 0; c < dh; ++c) s += G(i, c0 + c) * V(j, c0 + c);
          dp(j) = s;
          dot += s * P(i, j);
          if (gv != nullptr) {
            const double p = P(i, j);
            for (Eigen::Index c = 0; c < dh; ++c) (*gv)(j, c0 + c) += p * G(i, c0 + c);
          }
        }
        for (Eigen::Index j = 0; j < lim; ++j) {
          const double ds = P(i, j) * (dp(j) - dot) * scl;
          if (gq != nullptr) {
            for (Eigen::Index c = 0; c < dh; ++c) (*gq)(i, c0 + c) += ds * K(j, c0 + c);
          }
          if (gk != nullptr) {
            for (Eigen::Index c = 0; c < dh; ++c) (*gk)(j, c0 + c) += ds * Q(i, c0 + c);
          }
        }
      }
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: width mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> saved(parts.begin(), parts.end());
  return parts.front().tape().push(std::move(out), parts, [saved](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Eigen::Index r = 0;
    for (const Var& p : saved) {
      const Eigen::Index n = p.rows();
      if (needs(p) && n > 0) t.grad(p.id()) += g.middleRows(r, n);
      r += n;
    }
  });
}

Var concat_cols(Var a, Var b) {
  if (a.rows() != b.rows()) throw DimensionError("concat_cols: height mismatch");
  Matrix out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a.value();
  out.rightCols(b.cols()) = b.value();
  return a.tape().push(std::move(out), {a, b}, [a, b](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    if (needs(a)) t.grad(a.id()) += g.leftCols(a.cols());
    if (needs(b)) t.grad(b.id()) += g.rightCols(b.cols());
  });
}

Var slice_rows(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw DimensionError("slice_rows: range outside input");
  }
  Matrix out = x.value().middleRows(start, count);
  return x.tape().push(std::move(out), {x}, [x, start, count](Tape& t, int self) {
    t.grad(x.id()).middleRows(start, count) += t.grad(self);
  });
}

Var gather_rows(Var table, std::span<const int> rows) {
  const Matrix& tv = table.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), tv.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= tv.rows()) throw std::out_of_range("gather_rows: row index");
    out.row(static_cast<Eigen::Index>(i)) = tv.row(rows[i]);
  }
  std::vector<int> ids(rows.begin(), rows.end());
  return table.tape().push(std::move(out), {table}, [table, ids](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    Matrix& gt = t.grad(table.id());
    for (std::size_t i = 0; i < ids.size(); ++i) gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
  });
}

Var mean_rows(Var x) {
  if (x.rows() == 0) throw DimensionError("mean_rows: empty input");
  Matrix out = x.value().colwise().mean();
  return x.tape().push(std::move(out), {x}, [x](Tape& t, int self) {
    const Matrix& g = t.grad(self);
    t.grad(x.id()).rowwise() += g.row(0) / static_cast<double>(x.rows());
  });
}

Var repeat_rows(Var row, Eigen::Index times) {
  if (row.rows() != 1) throw DimensionError("repeat_rows: input must be a single row");
  Matrix out = row.value().replicate(times, 1);
  return row.tape().push(std::move(out), {row}, [row](Tape& t, int self) {
    t.grad(row.id()) += t.grad(self).colwise().sum();
  });
}

Var reshape(Var x, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != x.value().size()) throw DimensionError("reshape: element count changes");
  Matrix out = Eigen::Map<const Matrix>(x.value().data(), rows, cols);
  return x.tape().push(std::move(out), {x}, [x](Tape& t, int self) {
    Matrix& gx = t.grad(x.id());
    const Matrix& g = t.grad(self);
    Eigen::Map<Matrix>(gx.data(), g.rows(), g.cols()) += g;
  });
}

Var cross_entropy(Var logits, std::span<const int> targets) {
  const Matrix& L = logits.value();
  if (static_cast<Eigen::Index>(targets.size()) != L.rows() || L.rows() == 0) {
    throw DimensionError("cross_entropy: one target per logit row required");
  }
  auto probs = std::make_shared<Matrix>(L.rows(), L.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const int gold = targets[static_cast<std::size_t>(i)];
    if (gold < 0 || gold >= L.cols()) throw std::out_of_range("cross_entropy: gold index");
    const double mx = L.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < L.cols(); ++j) {
      const double e = std::exp(L(i, j) - mx);
      (*probs)(i, j) = e;
      z += e;
    }
    probs->row(i) /= z;
    total += std::log(z) + mx - L(i, gold);
  }
  const double n = static_cast<double>(L.rows());
  Matrix out(1, 1);
  out(0, 0) = total / n;
  std::vector<int> gold(targets.begin(), targets.end());
  return logits.tape().push(std::move(out), {logits}, [logits, probs, gold, n](Tape& t, int self) {
    const double g = t.grad(self)(0, 0) / n;
    Matrix& gl = t.grad(logits.id());
    for (Eigen::Index i = 0; i < probs->rows(); ++i) {
      gl.row(i) += g * probs->row(i);
      gl(i, gold[static_cast<std::size_t>(i)]) -= g;
    }
  });
}

}  // namespace gmp::nn
