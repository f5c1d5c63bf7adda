#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "retext/rng.hpp"
#include "retext/sparse.hpp"

namespace retext {

using Vec = std::vector<double>;

// Dense row-major matrix. One-hot convolution multiplies these against
// sparse region vectors, so per row only the touched columns accumulate.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), d_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int r, int c) { return d_[idx(r, c)]; }
  double operator()(int r, int c) const { return d_[idx(r, c)]; }

  double* row(int r) { return d_.data() + idx(r, 0); }
  const double* row(int r) const { return d_.data() + idx(r, 0); }

  std::vector<double>& data() { return d_; }
  const std::vector<double>& data() const { return d_; }

  void fill(double v) { d_.assign(d_.size(), v); }

  void init_uniform(Rng& rng, double lo, double hi) {
    for (double& x : d_) x = rng.range(lo, hi);
  }

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> d_;
};

// acc += M * s  (sparse right-hand side)
inline void addmul_sparse(Vec& acc, const Matrix& m, const SparseVec& s) {
  if (s.dim != m.cols())
    throw std::invalid_argument("addmul_sparse: dimension mismatch");
  for (int r = 0; r < m.rows(); ++r) {
    const double* w = m.row(r);
    double sum = acc[r];
    for (const auto& [j, v] : s.pairs) sum += w[j] * v;
    acc[r] = sum;
  }
}

// acc += M * x  (dense right-hand side)
inline void addmul_dense(Vec& acc, const Matrix& m, const Vec& x) {
  if (static_cast<int>(x.size()) != m.cols())
    throw std::invalid_argument("addmul_dense: dimension mismatch");
  for (int r = 0; r < m.rows(); ++r) {
    const double* w = m.row(r);
    double sum = acc[r];
    for (int j = 0; j < m.cols(); ++j) sum += w[j] * x[j];
    acc[r] = sum;
  }
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Matrix identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

}  // namespace retext
