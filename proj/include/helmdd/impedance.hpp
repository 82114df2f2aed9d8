#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "helmdd/fem.hpp"
#include "helmdd/spaces.hpp"

namespace helmdd {

enum class ImpedanceKind {
  IdentityD,              // T_j = Id on dof(Gamma_j)
  ScaledMass,             // T_j = z M_Gamma_j
  SecondOrder,            // T_j = K_Gamma_j / (2|kappa|) + |kappa| M_Gamma_j
  RotatedSecondOrder,     // exp(-i theta) * second order
  ScaledReference,        // T_j = z * (HPD catalog reference)
  PerSubdomainScaledMass  // T_j = z_j M_Gamma_j
};

enum class ReferenceKind { IdentityD, Mass, SecondOrder };

struct ImpedanceSpec {
  ImpedanceKind kind = ImpedanceKind::IdentityD;
  Complex z{1.0, 0.0};
  double theta = 0.0;
  ReferenceKind reference = ReferenceKind::IdentityD;
  std::vector<Complex> z_per_subdomain;

  void validate(int subdomain_count) const;

  static ImpedanceSpec identity();
  static ImpedanceSpec scaled_mass(Complex z);
  static ImpedanceSpec second_order();
  static ImpedanceSpec rotated_second_order(double theta);
  static ImpedanceSpec scaled_reference(Complex z, ReferenceKind reference);
  static ImpedanceSpec per_subdomain_scaled_mass(std::vector<Complex> z);
};

struct CoercivityReport {
  bool coercive = false;
  double min_rayleigh = 0.0;
};

/// Block-diagonal impedance T = diag(T_1, ..., T_J) together with its
/// symmetric part Ts = (T + T*)/2, the induced norms, and the two skeleton
/// factorizations (R* T* R and R* T R) shared by the exchange operator and
/// the polar/space decompositions. Immutable after construction.
class ImpedanceOperator {
 public:
  ImpedanceOperator(std::vector<ComplexMatrix> blocks, const TraceSpaces& spaces);

  const TraceSpaces& spaces() const { return *spaces_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  const ComplexMatrix& block(int j) const { return blocks_[j]; }
  const ComplexMatrix& sym_block(int j) const { return sym_blocks_[j]; }

  MultiTraceDual apply(const MultiTracePrimal& v) const;          // T
  MultiTraceDual apply_adjoint(const MultiTracePrimal& v) const;  // T*
  MultiTraceDual apply_sym(const MultiTracePrimal& v) const;      // Ts
  MultiTracePrimal solve_sym(const MultiTraceDual& p) const;      // Ts^-1

  double norm_ts(const MultiTracePrimal& v) const;
  double norm_ts_dual(const MultiTraceDual& p) const;

  SkeletonVector solve_skeleton_adjoint(const SkeletonVector& rhs) const;  // (R* T* R)^-1
  SkeletonVector solve_skeleton(const SkeletonVector& rhs) const;          // (R* T R)^-1

  ComplexMatrix dense() const;
  ComplexMatrix dense_sym() const;
  ComplexMatrix dense_sym_inverse() const;

  /// True when ||T - T*||_max <= tol * ||T||_max.
  bool is_hermitian(double tol = 1e-13) const;

 private:
  const TraceSpaces* spaces_;
  std::vector<ComplexMatrix> blocks_;
  std::vector<ComplexMatrix> sym_blocks_;
  std::vector<HermitianFactorization> sym_factors_;
  std::unique_ptr<LuFactorization> skeleton_adjoint_lu_;
  std::unique_ptr<LuFactorization> skeleton_lu_;
};

/// Raw T_j matrices for a catalog spec; no coercivity requirement, so this
/// is also the entry point for deliberately non-coercive probes.
std::vector<ComplexMatrix> assemble_impedance_blocks(const ImpedanceSpec& spec,
                                                     const SubdomainTopology& topo,
                                                     const FemSystem& fem);

/// Smallest Rayleigh quotient of Ts against the boundary-mass Gram, taken
/// over all subdomain blocks; coercive iff it exceeds 1e-12.
CoercivityReport verify_coercivity(const std::vector<ComplexMatrix>& t_blocks,
                                   const std::vector<ComplexMatrix>& mass_blocks);

/// Catalog construction; throws CoercivityError (with the minimal Rayleigh
/// quotient) when Ts fails to be positive definite.
ImpedanceOperator build_impedance(const ImpedanceSpec& spec, const TraceSpaces& spaces,
                                  const FemSystem& fem);

/// Direct construction from user-supplied blocks (e.g. Lambda_j, or probes
/// for the locality criterion).
ImpedanceOperator build_impedance_from_blocks(std::vector<ComplexMatrix> blocks,
                                              const TraceSpaces& spaces);

/// Splitting of V_h(Sigma) = X_h(Sigma) + T^-1(X_h(Sigma)^o):
/// x = R (R* T R)^-1 R* T v and r = v - x, so that T(r) is polar.
struct PrimalDecomposition {
  MultiTracePrimal single_trace;  // x
  MultiTracePrimal remainder;     // r
};
PrimalDecomposition decompose_primal(const MultiTracePrimal& v, const ImpedanceOperator& t);

}  // namespace helmdd
