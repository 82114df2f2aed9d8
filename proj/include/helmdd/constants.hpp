#pragma once

#include <optional>

#include "helmdd/rng.hpp"
#include "helmdd/solver.hpp"

namespace helmdd {

/// Discrete harmonic lifting: the minimal-H1-norm right inverse of the
/// trace operator, realized per subdomain as interior values -N_II^-1 N_IG v.
/// Lambda_j is the boundary Schur complement of the H1 Gram, so that
/// ||B'(v)||_H1 = ||v||_Lambda.
class HarmonicLifting {
 public:
  HarmonicLifting(const FemSystem& fem, const TraceSpaces& spaces);

  const TraceSpaces& spaces() const { return *spaces_; }
  const ComplexMatrix& lambda_block(int j) const { return lambda_[j]; }
  ComplexMatrix lambda_dense() const;

  BrokenVector apply(const MultiTracePrimal& v) const;  // B'
  double lifting_norm(const MultiTracePrimal& v) const;  // ||v||_Lambda

  /// (B')^T applied to a broken functional; recovers the Neumann trace u_N
  /// of a field u with A u annihilating Ker(B), via <u_N, q> = <A u, B' q>.
  MultiTraceDual apply_transpose(const BrokenVector& f) const;

 private:
  const TraceSpaces* spaces_;
  std::vector<std::vector<int>> interior_;              // local volume indices
  std::vector<ComplexMatrix> interior_to_boundary_;     // X_j = N_II^-1 N_IG
  std::vector<ComplexMatrix> lambda_;
};

struct TraceBounds {
  double t_minus = 0.0;
  double t_plus = 0.0;
};

/// t_h-+: extremal generalized eigenvalues of Ts against Lambda, square-rooted.
TraceBounds compute_trace_bounds(const ImpedanceOperator& t, const HarmonicLifting& lifting);

/// t_h*: norm of the skew part (T - T*)/2 from the Ts norm to the Ts^-1 norm.
double compute_skew_bound(const ImpedanceOperator& t);

/// Discrete inf-sup constant of the conforming problem in the H1 norm.
double compute_infsup_alpha(const Mesh& mesh, const MediumSpec& medium);

/// Continuity modulus ||a|| of the broken Helmholtz form.
double compute_continuity(const FemSystem& fem, const TraceSpaces& spaces);

/// Inf-sup constant of the Robin operator A - i B* T B on the broken space.
double compute_beta(const FemSystem& fem, const ImpedanceOperator& t);

ComplexMatrix robin_dense(const FemSystem& fem, const ImpedanceOperator& t);

/// Oblique projector onto the Cauchy-trace space parallel to
/// X_h(Sigma) x X_h(Sigma)^o, built from the constructive recipe: solve a
/// conforming problem for the continuous part, lift, and read traces back.
class CauchyProjector {
 public:
  CauchyProjector(const FemSystem& fem, const TraceSpaces& spaces, const HarmonicLifting& lifting);

  std::pair<MultiTracePrimal, MultiTraceDual> apply(const MultiTracePrimal& v,
                                                    const MultiTraceDual& p) const;

  /// Matrix on the stacked (primal, dual) coefficients, 2n x 2n.
  ComplexMatrix dense() const;

 private:
  const FemSystem* fem_;
  const TraceSpaces* spaces_;
  const HarmonicLifting* lifting_;
  LuFactorization conforming_lu_;

  BrokenVector apply_helmholtz(const BrokenVector& u) const;
};

/// Operator norm of P in the product metric Ts x Ts^-1.
double compute_projector_norm(const CauchyProjector& projector, const ImpedanceOperator& t);

/// Max over random right-hand sides of the relative Ts^-1 discrepancy between
/// (Id + Pi S)^-1 f and (i/2) T' P T Ts^-1 f.
double verify_factorization(const SkeletonSystem& system, const CauchyProjector& projector,
                            int samples, Rng& rng);

struct GammaResult {
  double exact = 0.0;
  double bound_thm = 0.0;
  std::optional<double> bound_hpd;  // 1/||P||, emitted only for T = T*
};

/// lambda_k = <(Id + Pi S) p_k, Ts^-1(conj p_k)> over Ts^-1-unit samples.
std::vector<Complex> sample_field_of_values(const SkeletonSystem& system, int samples, Rng& rng);

struct ConstantsReport {
  double t_minus = 0.0;
  double t_plus = 0.0;
  double t_star = 0.0;
  double alpha_h = 0.0;
  double beta_h = 0.0;
  double norm_a = 0.0;
  double gamma_exact = 0.0;
  double gamma_bound_thm = 0.0;
  std::optional<double> gamma_bound_hpd;
  double norm_p = 0.0;
};

/// Every constant of the convergence theory in one pass; throws if the
/// certified inequalities (bounds of the theory) fail to hold numerically
/// or the multi-trace space exceeds the densification cap.
ConstantsReport compute_constants(const Mesh& mesh, const FemSystem& fem,
                                  const TraceSpaces& spaces, const ImpedanceOperator& t,
                                  const SkeletonSystem& system);

}  // namespace helmdd
