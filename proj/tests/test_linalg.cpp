#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helmdd/linalg.hpp"
#include "helmdd/rng.hpp"

using namespace helmdd;

namespace {

ComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.complex_uniform();
  return m;
}

ComplexMatrix random_hpd(Rng& rng, int n) {
  ComplexMatrix a = random_matrix(rng, n, n);
  return a.adjoint() * a + static_cast<double>(n) * ComplexMatrix::Identity(n, n);
}

}  // namespace

TEST_CASE("lu solve: identity and diagonal cases") {
  Rng rng(11);
  ComplexVector b = rng.complex_vector(5);
  LuFactorization identity(ComplexMatrix::Identity(5, 5).eval());
  CHECK((identity.solve(b) - b).norm() == doctest::Approx(0.0));

  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  ComplexVector rhs(2);
  rhs << Complex(2, 0), Complex(3, 0);
  ComplexVector x = solve_linear(LuFactorization(d), rhs);
  CHECK(std::abs(x(0) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(x(1) - Complex(1, 0)) < 1e-15);
}

TEST_CASE("lu solve: residual oracle on random well-conditioned systems") {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    ComplexMatrix a = random_matrix(rng, 20, 20) + 10.0 * ComplexMatrix::Identity(20, 20);
    ComplexVector b = rng.complex_vector(20);
    ComplexVector x = LuFactorization(a).solve(b);
    CHECK((a * x - b).norm() <= 1e-10 * b.norm());
  }
}

TEST_CASE("lu: dimension mismatch and singularity errors") {
  Rng rng(13);
  LuFactorization lu(random_hpd(rng, 4));
  CHECK_THROWS_AS(lu.solve(rng.complex_vector(5)), DimensionError);

  ComplexMatrix singular = ComplexMatrix::Zero(3, 3);
  singular(0, 0) = 1.0;
  singular(1, 1) = 1.0;  // third row identically zero
  CHECK_THROWS_AS((LuFactorization{singular}), SingularMatrixError);

  ComplexMatrix rank_deficient = random_matrix(rng, 4, 4);
  rank_deficient.row(3) = rank_deficient.row(0) + rank_deficient.row(1);
  CHECK_THROWS_AS((LuFactorization{rank_deficient}), SingularMatrixError);
}

TEST_CASE("hermitian factorization reproduces its source") {
  Rng rng(14);
  for (int n : {1, 3, 8, 25}) {
    ComplexMatrix g = random_hpd(rng, n);
    HermitianFactorization chol(g);
    ComplexMatrix rebuilt = chol.lower_factor() * chol.lower_factor().adjoint();
    CHECK((rebuilt - g).cwiseAbs().maxCoeff() <= 1e-12 * g.cwiseAbs().maxCoeff());

    ComplexVector b = rng.complex_vector(n);
    CHECK((g * chol.solve(b) - b).norm() <= 1e-11 * b.norm());
  }
}

TEST_CASE("hermitian factorization rejects bad input") {
  Rng rng(15);
  ComplexMatrix not_hermitian = random_matrix(rng, 4, 4);
  CHECK_THROWS_AS((HermitianFactorization{not_hermitian}), Error);

  ComplexMatrix indefinite = ComplexMatrix::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  try {
    HermitianFactorization bad(indefinite);
    CHECK(false);
  } catch (const NotPositiveDefiniteError& e) {
    CHECK(e.pivot_index == 2);
  }
}

TEST_CASE("generalized eigenvalues: trivial pencils") {
  Rng rng(16);
  ComplexMatrix n = random_hpd(rng, 6);
  auto equal = extremal_generalized_eig(n, n);
  CHECK(equal.lambda_min == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(equal.lambda_max == doctest::Approx(1.0).epsilon(1e-10));

  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 4.0;
  auto diag = extremal_generalized_eig(m, ComplexMatrix::Identity(2, 2).eval());
  CHECK(diag.lambda_min == doctest::Approx(1.0));
  CHECK(diag.lambda_max == doctest::Approx(4.0));
}

TEST_CASE("generalized eigenvalues: residual of returned eigenpairs") {
  Rng rng(17);
  ComplexMatrix m = random_matrix(rng, 12, 12);
  m = ((m + m.adjoint()) / 2.0).eval();
  ComplexMatrix n = random_hpd(rng, 12);
  auto eig = extremal_generalized_eig(m, n);
  CHECK(eig.lambda_min <= eig.lambda_max);
  for (auto [lambda, vec] :
       {std::pair{eig.lambda_min, eig.vec_min}, std::pair{eig.lambda_max, eig.vec_max}}) {
    ComplexVector residual = m * vec - lambda * (n * vec);
    CHECK(residual.norm() <= 1e-8 * (n * vec).norm());
  }
}

TEST_CASE("generalized eigenvalues: non-HPD right-hand matrix is reported") {
  ComplexMatrix m = ComplexMatrix::Identity(3, 3);
  ComplexMatrix n = ComplexMatrix::Identity(3, 3);
  n(1, 1) = 0.0;
  try {
    extremal_generalized_eig(m, n);
    CHECK(false);
  } catch (const NotPositiveDefiniteError& e) {
    CHECK(e.pivot_index == 1);
  }
}

TEST_CASE("weighted smallest singular value: pinned cases") {
  Rng rng(18);
  ComplexMatrix id = ComplexMatrix::Identity(4, 4);
  CHECK(min_singular_in_norms(id, id, id) == doctest::Approx(1.0));

  ComplexMatrix k = ComplexMatrix::Zero(2, 2);
  k(0, 0) = 3.0;
  k(1, 1) = 5.0;
  ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  CHECK(min_singular_in_norms(k, id2, id2) == doctest::Approx(3.0));
  CHECK(max_singular_in_norms(k, id2, id2) == doctest::Approx(5.0));
}

TEST_CASE("weighted smallest singular value: identity map in any HPD norm") {
  Rng rng(19);
  for (int n : {2, 5, 11}) {
    ComplexMatrix g = random_hpd(rng, n);
    double sigma = min_singular_in_norms(ComplexMatrix::Identity(n, n).eval(), g, g);
    CHECK(std::abs(sigma - 1.0) <= 1e-10);
  }
}

TEST_CASE("weighted singular values against an unweighted oracle") {
  // fold the Grams into the operator by hand and compare plain SVDs
  Rng rng(20);
  const int n = 9;
  ComplexMatrix k = random_matrix(rng, n, n);
  ComplexMatrix g_out = random_hpd(rng, n);
  ComplexMatrix g_in = random_hpd(rng, n);

  HermitianFactorization out(g_out), in(g_in);
  ComplexMatrix folded = out.lower_factor().adjoint() * k *
                         in.lower_factor().adjoint().inverse();
  Eigen::JacobiSVD<ComplexMatrix> svd(folded);
  const double expect_min = svd.singularValues()(n - 1);
  const double expect_max = svd.singularValues()(0);

  CHECK(min_singular_in_norms(k, g_out, g_in) == doctest::Approx(expect_min).epsilon(1e-10));
  CHECK(max_singular_in_norms(k, g_out, g_in) == doctest::Approx(expect_max).epsilon(1e-10));
}
