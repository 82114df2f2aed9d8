#include "helmdd/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace helmdd {

namespace {

void require_square(const ComplexMatrix& a, const char* who) {
  if (a.rows() != a.cols())
    throw DimensionError(std::string(who) + ": matrix is not square (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
}

void require_finite(const ComplexMatrix& a, const char* who) {
  if (!a.allFinite()) throw Error(std::string(who) + ": matrix has non-finite entries");
}

// L_in^-H applied from the right: returns K * L^-H for lower-triangular L.
ComplexMatrix right_solve_adjoint(const ComplexMatrix& k, const ComplexMatrix& lower) {
  // X L^H = K  <=>  L X^H = K^H
  ComplexMatrix xh = lower.triangularView<Eigen::Lower>().solve(k.adjoint());
  return xh.adjoint();
}

Eigen::VectorXd singular_values(const ComplexMatrix& c) {
  // Jacobi is the more accurate option; fall back to divide-and-conquer
  // for sizes where its cost becomes noticeable.
  if (std::max(c.rows(), c.cols()) <= 1024) {
    Eigen::JacobiSVD<ComplexMatrix> svd(c);
    return svd.singularValues();
  }
  Eigen::BDCSVD<ComplexMatrix> svd(c);
  return svd.singularValues();
}

}  // namespace

double hermitian_defect(const ComplexMatrix& a) {
  double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.adjoint().eval()).cwiseAbs().maxCoeff() / scale;
}

HermitianFactorization::HermitianFactorization(ComplexMatrix matrix) : source_(std::move(matrix)) {
  require_square(source_, "HermitianFactorization");
  require_finite(source_, "HermitianFactorization");
  if (hermitian_defect(source_) > 1e-12)
    throw Error("HermitianFactorization: matrix is not Hermitian within 1e-12");

  const Eigen::Index n = source_.rows();
  lower_ = ComplexMatrix::Zero(n, n);

  double diag_scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(source_(i, i).real()));
  const double threshold = 1e-14 * std::max(diag_scale, 1e-300);

  for (Eigen::Index j = 0; j < n; ++j) {
    double d = source_(j, j).real() - lower_.row(j).head(j).squaredNorm();
    if (!(d > threshold))
      throw NotPositiveDefiniteError(
          "HermitianFactorization: pivot " + std::to_string(j) + " is not positive (" +
              std::to_string(d) + ")",
          static_cast<int>(j));
    const double ljj = std::sqrt(d);
    lower_(j, j) = ljj;
    if (j + 1 < n) {
      lower_.col(j).tail(n - j - 1) =
          (source_.col(j).tail(n - j - 1) -
           lower_.bottomLeftCorner(n - j - 1, j) * lower_.row(j).head(j).adjoint()) /
          ljj;
    }
  }
}

ComplexVector HermitianFactorization::solve(const ComplexVector& rhs) const {
  if (rhs.size() != size())
    throw DimensionError("HermitianFactorization::solve: rhs size mismatch");
  ComplexVector y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

ComplexMatrix HermitianFactorization::solve(const ComplexMatrix& rhs) const {
  if (rhs.rows() != size())
    throw DimensionError("HermitianFactorization::solve: rhs rows mismatch");
  ComplexMatrix y = lower_.triangularView<Eigen::Lower>().solve(rhs);
  return lower_.adjoint().triangularView<Eigen::Upper>().solve(y);
}

ComplexMatrix HermitianFactorization::inverse() const {
  return solve(ComplexMatrix::Identity(size(), size()).eval());
}

LuFactorization::LuFactorization(ComplexMatrix matrix) {
  require_square(matrix, "LuFactorization");
  require_finite(matrix, "LuFactorization");
  Eigen::VectorXd row_norms = matrix.cwiseAbs().rowwise().maxCoeff();
  lu_.compute(matrix);
  const ComplexMatrix& packed = lu_.matrixLU();
  Eigen::VectorXd permuted_norms = lu_.permutationP() * row_norms;
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    // pivot measured against the source row it eliminates
    const double scale = permuted_norms(i);
    const double pivot = std::abs(packed(i, i));
    if (scale == 0.0 || pivot < 1e-14 * scale)
      throw SingularMatrixError(
          "LuFactorization: singular to working precision at pivot " + std::to_string(i),
          static_cast<int>(i));
  }
}

ComplexVector LuFactorization::solve(const ComplexVector& rhs) const {
  if (rhs.size() != size()) throw DimensionError("LuFactorization::solve: rhs size mismatch");
  return lu_.solve(rhs);
}

ComplexMatrix LuFactorization::solve(const ComplexMatrix& rhs) const {
  if (rhs.rows() != size()) throw DimensionError("LuFactorization::solve: rhs rows mismatch");
  return lu_.solve(rhs);
}

ComplexVector solve_linear(const LuFactorization& fact, const ComplexVector& b) {
  return fact.solve(b);
}

ComplexVector solve_linear(const HermitianFactorization& fact, const ComplexVector& b) {
  return fact.solve(b);
}

ExtremalEigenResult extremal_generalized_eig(const ComplexMatrix& m, const ComplexMatrix& n) {
  require_square(m, "extremal_generalized_eig");
  if (m.rows() != n.rows())
    throw DimensionError("extremal_generalized_eig: pencil dimension mismatch");
  if (hermitian_defect(m) > 1e-12)
    throw Error("extremal_generalized_eig: M is not Hermitian within 1e-12");

  HermitianFactorization chol(n);
  const ComplexMatrix& lower = chol.lower_factor();
  ComplexMatrix half = lower.triangularView<Eigen::Lower>().solve(m);
  ComplexMatrix reduced = right_solve_adjoint(half, lower);
  reduced = 0.5 * (reduced + reduced.adjoint().eval());

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(reduced);
  if (eig.info() != Eigen::Success)
    throw Error("extremal_generalized_eig: dense eigensolve failed to converge");

  ExtremalEigenResult result;
  const Eigen::Index last = reduced.rows() - 1;
  result.lambda_min = eig.eigenvalues()(0);
  result.lambda_max = eig.eigenvalues()(last);
  // Back-substitute the congruence to recover pencil eigenvectors.
  result.vec_min = lower.adjoint().triangularView<Eigen::Upper>().solve(eig.eigenvectors().col(0).eval());
  result.vec_max = lower.adjoint().triangularView<Eigen::Upper>().solve(eig.eigenvectors().col(last).eval());
  return result;
}

namespace {

ComplexMatrix normal_form(const ComplexMatrix& k, const ComplexMatrix& g_out,
                          const ComplexMatrix& g_in) {
  if (k.rows() != g_out.rows())
    throw DimensionError("singular_in_norms: K rows do not match output Gram");
  if (k.cols() != g_in.rows())
    throw DimensionError("singular_in_norms: K cols do not match input Gram");
  HermitianFactorization out(g_out);
  HermitianFactorization in(g_in);
  ComplexMatrix c = out.lower_factor().adjoint().triangularView<Eigen::Upper>() * k;
  return right_solve_adjoint(c, in.lower_factor());
}

}  // namespace

double min_singular_in_norms(const ComplexMatrix& k, const ComplexMatrix& g_out,
                             const ComplexMatrix& g_in) {
  if (k.cols() > k.rows()) return 0.0;  // wide map: nontrivial kernel
  Eigen::VectorXd sv = singular_values(normal_form(k, g_out, g_in));
  return sv(sv.size() - 1);
}

ComplexMatrix whiten_operator(const ComplexMatrix& k, const HermitianFactorization& gram) {
  if (k.rows() != gram.size() || k.cols() != gram.size())
    throw DimensionError("whiten_operator: operator and Gram sizes differ");
  const ComplexMatrix& lower = gram.lower_factor();
  ComplexMatrix half = lower.triangularView<Eigen::Lower>().solve(k);
  return right_solve_adjoint(half, lower);
}

double min_singular_value(const ComplexMatrix& c) {
  Eigen::VectorXd sv = singular_values(c);
  return sv(sv.size() - 1);
}

double max_singular_value(const ComplexMatrix& c) {
  Eigen::VectorXd sv = singular_values(c);
  return sv(0);
}

double max_singular_in_norms(const ComplexMatrix& k, const ComplexMatrix& g_out,
                             const ComplexMatrix& g_in) {
  Eigen::VectorXd sv = singular_values(normal_form(k, g_out, g_in));
  return sv(0);
}

}  // namespace helmdd
