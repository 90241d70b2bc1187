#include <cmath>
#include <random>

#include "doctest.h"

#include "gmp/errors.hpp"
#include "gmp/nn/gradcheck.hpp"
#include "gmp/nn/layers.hpp"
#include "gmp/nn/optim.hpp"

using namespace gmp;
using namespace gmp::nn;

namespace {

Parameter& random_param(ParameterStore& store, const std::string& name, int r, int c, Rng& rng) {
  Parameter& p = store.add(name, r, c);
  init_normal(p, 0.7, rng);
  return p;
}

void check_grad(const LossFn& fn, ParameterStore& store) {
  const auto res = gradcheck(fn, store);
  INFO("worst ", res.worst_parameter, "[", res.worst_index, "] analytic ", res.worst_analytic,
       " numeric ", res.worst_numeric);
  CHECK(res.max_rel_error < 1e-6);
  CHECK(res.checked == store.scalar_count());
}

}  // namespace

TEST_SUITE("autograd") {

TEST_CASE("kernels agree with Eigen products") {
  Rng rng(1);
  Matrix a = Matrix::Random(5, 7), b = Matrix::Random(7, 3), c = Matrix::Random(4, 7);
  Matrix out;
  gemm_nn(a, b, out);
  CHECK((out - a * b).cwiseAbs().maxCoeff() < 1e-12);
  gemm_nt(a, c, out);
  CHECK((out - a * c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Matrix e = Matrix::Random(5, 2);
  gemm_tn(a, e, out);
  CHECK((out - a.transpose() * e).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cross entropy closed forms") {
  Tape tape;
  Var logits = tape.constant(Matrix{{1.0, 2.0, 3.0}});
  const int gold = 2;
  CHECK(scalar(cross_entropy(logits, std::span<const int>(&gold, 1))) ==
        doctest::Approx(0.40760596444438).epsilon(1e-12));
  Var uniform = tape.constant(Matrix::Zero(1, 5));
  CHECK(scalar(cross_entropy(uniform, std::span<const int>(&gold, 1))) ==
        doctest::Approx(std::log(5.0)).epsilon(1e-14));
  Var peaked = tape.constant(Matrix{{0.0, 0.0, 800.0}});
  CHECK(scalar(cross_entropy(peaked, std::span<const int>(&gold, 1))) < 1e-300);
  const int bad = 3;
  CHECK_THROWS_AS(cross_entropy(logits, std::span<const int>(&bad, 1)), std::out_of_range);
}

TEST_CASE("elementwise and shape ops gradcheck") {
  Rng rng(2);
  ParameterStore store;
  Parameter& a = random_param(store, "a", 3, 4, rng);
  Parameter& b = random_param(store, "b", 3, 4, rng);
  Parameter& row = random_param(store, "row", 1, 4, rng);
  Parameter& w = random_param(store, "w", 4, 6, rng);
  Parameter& g = random_param(store, "g", 1, 6, rng);
  Parameter& bias = random_param(store, "bias", 1, 6, rng);
  check_grad(
      [&](Tape& t) {
        Var x = add_scaled(t.param(a), t.param(b), 0.3);
        x = add_row(scale(x, 1.7), t.param(row));
        x = affine(gelu(x), t.param(w), t.param(bias));
        x = layer_norm(x, t.param(g), t.param(bias));
        const std::vector<Var> parts{x, repeat_rows(mean_rows(x), 2), slice_rows(x, 1, 1)};
        x = concat_rows(parts);
        x = reshape(x, 9, 4);
        const std::vector<int> rows{0, 3, 3, 8};
        x = concat_cols(gather_rows(x, rows), gather_rows(t.param(a), std::vector<int>{0, 1, 2, 2}));
        const std::vector<int> targets{1, 0, 7, 5};
        return cross_entropy(x, targets);
      },
      store);
}

TEST_CASE("matmul variants gradcheck") {
  Rng rng(3);
  ParameterStore store;
  Parameter& a = random_param(store, "a", 3, 5, rng);
  Parameter& b = random_param(store, "b", 5, 4, rng);
  Parameter& c = random_param(store, "c", 6, 4, rng);
  check_grad(
      [&](Tape& t) {
        Var x = matmul_nt(matmul(t.param(a), t.param(b)), t.param(c));
        const std::vector<int> targets{5, 0, 2};
        return cross_entropy(x, targets);
      },
      store);
}

TEST_CASE("attention gradcheck, causal and cross") {
  Rng rng(4);
  ParameterStore store;
  Parameter& q = random_param(store, "q", 3, 4, rng);
  Parameter& k = random_param(store, "k", 5, 4, rng);
  Parameter& v = random_param(store, "v", 5, 4, rng);
  for (bool causal : {false, true}) {
    check_grad(
        [&](Tape& t) {
          Var x = attention(t.param(q), t.param(k), t.param(v), 2, causal);
          const std::vector<int> targets{1, 3, 0};
          return cross_entropy(x, targets);
        },
        store);
  }
}

TEST_CASE("attention edge cases") {
  Tape tape;
  Var q = tape.constant(Matrix::Random(2, 4));
  Var empty = tape.constant(Matrix(0, 4));
  CHECK(attention(q, empty, empty, 2, false).value().isZero(0.0));
  CHECK_THROWS_AS(attention(q, q, q, 3, false), DimensionError);
}

TEST_CASE("parameter shared across uses accumulates gradient") {
  ParameterStore store;
  Parameter& p = store.add("p", 1, 1);
  p.value(0, 0) = 3.0;
  Tape tape;
  Var x = tape.param(p);
  Var y = add(matmul(x, x), scale(x, 2.0));  // x^2 + 2x
  tape.backward(y);
  CHECK(p.grad(0, 0) == doctest::Approx(8.0));
  CHECK(tape.param(p).id() == x.id());
}

TEST_CASE("non-recording tape keeps values only") {
  ParameterStore store;
  Parameter& p = store.add("p", 2, 2);
  p.value.setOnes();
  Tape tape(false);
  Var y = scale(tape.param(p), 2.0);
  CHECK(y.value()(1, 1) == 2.0);
  CHECK_FALSE(tape.requires_grad(y.id()));
  CHECK_THROWS_AS(tape.backward(y), std::logic_error);
}

TEST_CASE("gradcheck reports a wrong gradient") {
  ParameterStore store;
  Parameter& p = store.add("p", 1, 3);
  p.value << 0.5, -1.0, 2.0;
  // A deliberately broken op: forward doubles, backward passes the gradient through unchanged.
  auto broken = [](Var x) {
    return x.tape().push(x.value() * 2.0, {x}, [x](Tape& t, int self) { t.grad(x.id()) += t.grad(self); });
  };
  const auto res = gradcheck(
      [&](Tape& t) {
        const std::vector<int> targets{1};
        return cross_entropy(broken(t.param(p)), targets);
      },
      store);
  CHECK(res.max_rel_error > 0.1);
  CHECK(res.worst_parameter == "p");
  CHECK(res.over_tolerance > 0);
}

TEST_CASE("adam moves toward the minimum and clips") {
  ParameterStore store;
  Parameter& p = store.add("p", 1, 2);
  p.value << 3.0, -2.0;
  Adam adam(store);
  for (int i = 0; i < 500; ++i) {
    store.zero_grad();
    p.grad = 2.0 * p.value;  // d/dp |p|^2
    adam.step(0.05, 1.0);
  }
  CHECK(p.value.norm() < 0.05);
  store.zero_grad();
  p.grad << 30.0, 40.0;
  CHECK(adam.step(0.0, 1.0) == doctest::Approx(50.0));
}

TEST_CASE("weight decay shrinks matrices but not row vectors") {
  ParameterStore store;
  Parameter& w = store.add("w", 2, 2);
  Parameter& b = store.add("b", 1, 2);
  w.value.setConstant(2.0);
  b.value.setConstant(2.0);
  Adam adam(store);
  store.zero_grad();
  adam.step(0.1, 0.0, 0.5);
  CHECK((w.value.array() == 2.0 * (1.0 - 0.1 * 0.5)).all());
  CHECK((b.value.array() == 2.0).all());
}

}
