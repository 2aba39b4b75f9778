#pragma once

#include <Eigen/Core>

namespace ads {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EigenPair {
  Vector vector;  // unit norm, sign-canonical
  double value = 0.0;
};

/// Returns M * M^T. The lower triangle is accumulated once and mirrored, so
/// the result is exactly symmetric. A matrix with zero columns yields zeros.
Matrix gram(const Matrix& m);

/// Eigenvector of the algebraically largest eigenvalue of a symmetric matrix,
/// computed with cyclic Jacobi rotations.
///
/// Throws ContractViolation for non-square, asymmetric or non-finite input.
EigenPair max_eigvec(const Matrix& a);

/// Unit vector v maximising |M^T v|^2 (leading left singular direction).
///
/// When M has fewer columns than rows the problem is solved on the smaller
/// Gram matrix M^T M and mapped back through M.
/// Throws DegenerateInput when M is empty or identically zero.
Vector dominant_singular_dir(const Matrix& m);

/// Flips v so that its first entry with magnitude above 1e-12 is nonnegative.
void canonicalize_sign(Vector& v);

}  // namespace ads
