#pragma once

#include <Eigen/Core>

namespace gmp::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense products with a fixed per-element summation order (ascending inner
// index) regardless of operand shape, so a row of the result is bit-identical
// whether it is computed alone or inside a taller matrix.
//
// c = a * b      (accumulate: c += a * b)
void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
// c = a^T * b
void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);
// c = a * b^T
void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);

}  // namespace gmp::nn
