#include "gmp/nn/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>

namespace gmp::nn {

namespace {

using Index = Eigen::Index;

constexpr Index kMr = 4;   // output rows per register tile
constexpr Index kNr = 16;  // output columns per register tile

using Vec = double __attribute__((vector_size(64)));  // 8 lanes
constexpr Index kLanes = 8;
constexpr Index kVecs = kNr / kLanes;

inline Vec load(const double* p) {
  Vec v;
  std::memcpy(&v, p, sizeof v);
  return v;
}
inline void store(double* p, Vec v) { std::memcpy(p, &v, sizeof v); }

template <bool TransA>
inline double a_at(const double* a, Index lda, Index r, Index p) {
  return TransA ? a[r + p * lda] : a[r * lda + p];
}

// Tiles of c. Element (r, q) of a tile is
//   c(r, q) [or 0] + sum_{p ascending} A(r, p) * b[p * ldb + q],
// evaluated as one multiply-add per p in every tile shape, so an element's
// value never depends on which tile (or how tall a matrix) it falls into.
template <Index MR, bool TransA>
inline void full_tile(const double* __restrict a, Index lda, const double* __restrict b, Index ldb,
                      double* __restrict c, Index ldc, Index k, bool accumulate) {
  Vec acc[MR][kVecs];
  for (Index r = 0; r < MR; ++r) {
    for (Index v = 0; v < kVecs; ++v) acc[r][v] = accumulate ? load(c + r * ldc + v * kLanes) : Vec{};
  }
  for (Index p = 0; p < k; ++p) {
    const double* bp = b + p * ldb;
    Vec bv[kVecs];
    for (Index v = 0; v < kVecs; ++v) bv[v] = load(bp + v * kLanes);
    for (Index r = 0; r < MR; ++r) {
      const double s = a_at<TransA>(a, lda, r, p);
      for (Index v = 0; v < kVecs; ++v) acc[r][v] += s * bv[v];
    }
  }
  for (Index r = 0; r < MR; ++r) {
    for (Index v = 0; v < kVecs; ++v) store(c + r * ldc + v * kLanes, acc[r][v]);
  }
}

template <Index MR, bool TransA>
inline void edge_tile(const double* __restrict a, Index lda, const double* __restrict b, Index ldb,
                      double* __restrict c, Index ldc, Index k, Index width, bool accumulate) {
  for (Index r = 0; r < MR; ++r) {
    for (Index q = 0; q < width; ++q) {
      double acc = accumulate ? c[r * ldc + q] : 0.0;
      for (Index p = 0; p < k; ++p) acc += a_at<TransA>(a, lda, r, p) * b[p * ldb + q];
      c[r * ldc + q] = acc;
    }
  }
}

template <Index MR, bool TransA>
inline void row_block(const double* a, Index lda, const double* b, double* c, Index k, Index n,
                      bool accumulate) {
  Index j = 0;
  for (; j + kNr <= n; j += kNr) full_tile<MR, TransA>(a, lda, b + j, n, c + j, n, k, accumulate);
  if (j < n) edge_tile<MR, TransA>(a, lda, b + j, n, c + j, n, k, n - j, accumulate);
}

// c (m x n) = op(a) (m x k) * b (k x n); op(a) is a, or the transpose of a
// stored k x m.
template <bool TransA>
void product(const double* a, const double* b, double* c, Index m, Index k, Index n,
             bool accumulate) {
  const Index lda = TransA ? m : k;
  auto row = [&](Index i) { return TransA ? a + i : a + i * lda; };
  Index i = 0;
  for (; i + kMr <= m; i += kMr) row_block<kMr, TransA>(row(i), lda, b, c + i * n, k, n, accumulate);
  for (; i < m; ++i) row_block<1, TransA>(row(i), lda, b, c + i * n, k, n, accumulate);
}

void prepare(Matrix& c, Index m, Index n, bool accumulate) {
  if (accumulate) {
    assert(c.rows() == m && c.cols() == n);
  } else {
    c.resize(m, n);
  }
}

}  // namespace

void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.cols() == b.rows());
  const Index m = a.rows(), k = a.cols(), n = b.cols();
  prepare(c, m, n, accumulate);
  if (m == 0 || n == 0) return;
  product<false>(a.data(), b.data(), c.data(), m, k, n, accumulate);
}

void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.rows() == b.rows());
  const Index r = a.rows(), m = a.cols(), n = b.cols();
  prepare(c, m, n, accumulate);
  if (m == 0 || n == 0) return;
  product<true>(a.data(), b.data(), c.data(), m, r, n, accumulate);
}

void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  assert(a.cols() == b.cols());
  const Matrix bt = b.transpose();
  gemm_nn(a, bt, c, accumulate);
}

}  // namespace gmp::nn
