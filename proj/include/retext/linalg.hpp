#pragma once

#include "retext/matrix.hpp"

namespace retext {

// Eigendecomposition of a symmetric matrix, eigenvalues descending,
// eigenvectors as matching columns.
struct SymEigen {
  Vec values;
  Matrix vectors;
};

SymEigen symmetric_eigen(Matrix a);

// Singular values of an arbitrary matrix (descending), via the
// eigendecomposition of A^T A.
Vec singular_values(const Matrix& a);

// Inverse of a symmetric positive semi-definite matrix through its
// eigendecomposition. Eigenvalues below rel_cutoff * lambda_max are treated
// as zero (pseudo-inverse).
Matrix spd_pseudo_inverse(const Matrix& a, double rel_cutoff = 1e-12);

// lambda_max / lambda_min of a symmetric PSD matrix; infinity when the
// smallest eigenvalue is not positive.
double spd_condition(const Matrix& a);

}  // namespace retext
