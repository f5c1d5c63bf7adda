#include "retext/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace retext {

// Cyclic Jacobi rotations. Plenty for the small tables this project
// decomposes; converges quadratically once off-diagonal mass is small.
SymEigen symmetric_eigen(Matrix a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("symmetric_eigen: matrix not square");
  const int n = a.rows();
  Matrix v = identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int i, int j) { return a(i, i) > a(j, j); });
  SymEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(idx[j], idx[j]);
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, idx[j]);
  }
  return out;
}

// One-sided Jacobi on the columns. Working on A itself (not A^T A) keeps
// tiny singular values resolvable down to machine precision, which the
// rank gate at 1e-8 depends on.
Vec singular_values(const Matrix& a) {
  Matrix b = a.rows() >= a.cols() ? a : transpose(a);
  const int n = b.cols();
  const int rows = b.rows();
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < n - 1; ++i) {
      for (int j = i + 1; j < n; ++j) {
        double aii = 0.0, ajj = 0.0, aij = 0.0;
        for (int r = 0; r < rows; ++r) {
          aii += b(r, i) * b(r, i);
          ajj += b(r, j) * b(r, j);
          aij += b(r, i) * b(r, j);
        }
        if (std::abs(aij) <= 1e-15 * std::sqrt(aii * ajj)) continue;
        rotated = true;
        const double zeta = (ajj - aii) / (2.0 * aij);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (int r = 0; r < rows; ++r) {
          const double bi = b(r, i), bj = b(r, j);
          b(r, i) = cs * bi - sn * bj;
          b(r, j) = sn * bi + cs * bj;
        }
      }
    }
    if (!rotated) break;
  }
  Vec s(n);
  for (int j = 0; j < n; ++j) {
    double norm = 0.0;
    for (int r = 0; r < rows; ++r) norm += b(r, j) * b(r, j);
    s[j] = std::sqrt(norm);
  }
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}

Matrix spd_pseudo_inverse(const Matrix& a, double rel_cutoff) {
  SymEigen e = symmetric_eigen(a);
  const int n = a.rows();
  const double cutoff =
      e.values.empty() ? 0.0 : e.values.front() * rel_cutoff;
  Matrix inv(n, n);
  for (int k = 0; k < n; ++k) {
    if (e.values[k] <= cutoff) continue;
    const double w = 1.0 / e.values[k];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        inv(i, j) += w * e.vectors(i, k) * e.vectors(j, k);
  }
  return inv;
}

double spd_condition(const Matrix& a) {
  SymEigen e = symmetric_eigen(a);
  if (e.values.empty() || e.values.back() <= 0.0)
    return std::numeric_limits<double>::infinity();
  return e.values.front() / e.values.back();
}

}  // namespace retext
