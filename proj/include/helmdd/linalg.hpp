#pragma once

#include <Eigen/Dense>
#include <complex>

#include "helmdd/errors.hpp"

namespace helmdd {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Cholesky factorization L·L^H of a Hermitian positive definite matrix.
///
/// Construction validates Hermiticity (relative max-norm defect <= 1e-12)
/// and throws NotPositiveDefiniteError with the offending pivot index when
/// a diagonal pivot is not safely positive. The factor is retained so that
/// congruence transforms can reuse it.
class HermitianFactorization {
 public:
  explicit HermitianFactorization(ComplexMatrix matrix);

  const ComplexMatrix& source() const { return source_; }
  const ComplexMatrix& lower_factor() const { return lower_; }
  Eigen::Index size() const { return lower_.rows(); }

  ComplexVector solve(const ComplexVector& rhs) const;
  ComplexMatrix solve(const ComplexMatrix& rhs) const;

  /// Explicit inverse of the source matrix (desk-scale sizes only).
  ComplexMatrix inverse() const;

 private:
  ComplexMatrix source_;
  ComplexMatrix lower_;
};

/// Partial-pivoting LU of a square invertible matrix. A pivot with
/// |u_ii| < 1e-14 * ||row_i(U)||_inf raises SingularMatrixError.
class LuFactorization {
 public:
  explicit LuFactorization(ComplexMatrix matrix);

  Eigen::Index size() const { return lu_.rows(); }

  ComplexVector solve(const ComplexVector& rhs) const;
  ComplexMatrix solve(const ComplexMatrix& rhs) const;

 private:
  Eigen::PartialPivLU<ComplexMatrix> lu_;
};

ComplexVector solve_linear(const LuFactorization& fact, const ComplexVector& b);
ComplexVector solve_linear(const HermitianFactorization& fact, const ComplexVector& b);

struct ExtremalEigenResult {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  ComplexVector vec_min;
  ComplexVector vec_max;
};

/// Extremal eigenvalues of the Hermitian pencil M x = lambda N x with N
/// positive definite, via the congruence L^-1 M L^-H with N = L L^H and a
/// dense Hermitian eigensolve.
ExtremalEigenResult extremal_generalized_eig(const ComplexMatrix& m, const ComplexMatrix& n);

/// min over x != 0 of ||K x||_{g_out} / ||x||_{g_in}, i.e. the smallest
/// singular value of L_out^H K L_in^-H.
double min_singular_in_norms(const ComplexMatrix& k, const ComplexMatrix& g_out,
                             const ComplexMatrix& g_in);

/// sup counterpart of min_singular_in_norms.
double max_singular_in_norms(const ComplexMatrix& k, const ComplexMatrix& g_out,
                             const ComplexMatrix& g_in);

/// Hermiticity defect ||a - a^H||_max relative to ||a||_max.
double hermitian_defect(const ComplexMatrix& a);

/// L^-1 K L^-H for the Cholesky factor L of a Gram matrix: the coordinates
/// in which an operator V -> V* paired against the V norm on both sides has
/// plain 2-norm singular values (inf-sup and continuity constants).
ComplexMatrix whiten_operator(const ComplexMatrix& k, const HermitianFactorization& gram);

/// Extreme singular values of a plain matrix.
double min_singular_value(const ComplexMatrix& c);
double max_singular_value(const ComplexMatrix& c);

}  // namespace helmdd
