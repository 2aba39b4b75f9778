#include "ads/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ads/error.hpp"

namespace ads {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kOffDiagonalTolerance = 1e-12;

void check_symmetric(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ContractViolation("max_eigvec: matrix must be square and non-empty, got " +
                            std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  if (!a.allFinite()) throw ContractViolation("max_eigvec: matrix has non-finite entries");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < a.rows(); ++i) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-9 * scale) {
        throw ContractViolation("max_eigvec: matrix is not symmetric");
      }
    }
  }
}

// Jacobi rotation of the pair (g, h) with sine s and tau = s / (1 + c).
inline void rotate(double& g, double& h, double s, double tau) {
  const double gg = g;
  const double hh = h;
  g = gg - s * (hh + gg * tau);
  h = hh + s * (gg - hh * tau);
}

}  // namespace

Matrix gram(const Matrix& m) {
  Matrix g = Matrix::Zero(m.rows(), m.rows());
  if (m.cols() == 0) return g;
  g.selfadjointView<Eigen::Lower>().rankUpdate(m);
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

void canonicalize_sign(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

EigenPair max_eigvec(const Matrix& input) {
  check_symmetric(input);
  const Eigen::Index n = input.rows();

  // Only the upper triangle of `a` is maintained during the sweeps.
  Matrix a = input;
  Matrix v = Matrix::Identity(n, n);
  const double frobenius = input.norm();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index q = 1; q < n; ++q) {
      off += a.col(q).head(q).squaredNorm();
    }
    if (std::sqrt(2.0 * off) <= kOffDiagonalTolerance * frobenius) break;

    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) rotate(a(j, p), a(j, q), s, tau);
        for (Eigen::Index j = p + 1; j < q; ++j) rotate(a(p, j), a(j, q), s, tau);
        for (Eigen::Index j = q + 1; j < n; ++j) rotate(a(p, j), a(q, j), s, tau);
        double* vp = v.col(p).data();
        double* vq = v.col(q).data();
        for (Eigen::Index j = 0; j < n; ++j) rotate(vp[j], vq[j], s, tau);
      }
    }
  }

  // Largest diagonal entry; ties resolve to the smallest index.
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    if (a(i, i) > a(best, best)) best = i;
  }
  EigenPair result;
  result.value = a(best, best);
  result.vector = v.col(best);
  result.vector.normalize();
  canonicalize_sign(result.vector);
  return result;
}

Vector dominant_singular_dir(const Matrix& m) {
  if (m.cols() == 0 || m.rows() == 0) {
    throw DegenerateInput("dominant_singular_dir: empty matrix");
  }
  if (!(m.squaredNorm() > 0.0)) {
    throw DegenerateInput("dominant_singular_dir: zero matrix");
  }
  if (m.cols() < m.rows()) {
    // Leading right singular vector of the thin side, mapped back through M.
    const Matrix small = gram(m.transpose());
    Vector v = m * max_eigvec(small).vector;
    v.normalize();
    canonicalize_sign(v);
    return v;
  }
  return max_eigvec(gram(m)).vector;
}

}  // namespace ads
