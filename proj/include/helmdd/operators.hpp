#pragma once

#include <iosfwd>
#include <optional>

#include "helmdd/impedance.hpp"

namespace helmdd {

/// Largest multi-trace size for which operators are densified on demand.
inline constexpr int densify_cap = 1500;

/// Non-local exchange operator Pi = (T+T*) R (R* T* R)^-1 R* - Id acting on
/// Neumann multi-traces. Applying it costs one skeleton solve; the inverse
/// Pi^-1 = (T+T*) R (R* T R)^-1 R* - Id reuses the conjugate factorization.
/// Pi is a Ts^-1-isometry for every coercive impedance.
class ExchangeOperator {
 public:
  explicit ExchangeOperator(const ImpedanceOperator& impedance) : t_(&impedance) {}

  const ImpedanceOperator& impedance() const { return *t_; }
  const TraceSpaces& spaces() const { return t_->spaces(); }

  MultiTraceDual apply(const MultiTraceDual& p) const;
  MultiTraceDual apply_inverse(const MultiTraceDual& p) const;

  ComplexMatrix dense() const;

 private:
  const ImpedanceOperator* t_;
};

/// Classical interface swap: block j at dof x receives
/// -p_j(x) + (2/m(x)) sum_{k: x in Gamma_k} p_k(x). Pure index arithmetic.
MultiTraceDual apply_local_swap(const TraceSpaces& spaces, const MultiTraceDual& p);
ComplexMatrix local_swap_matrix(const TraceSpaces& spaces);

struct LocalityReport {
  bool trace_identity = false;   // Pi_loc T* R == T R
  bool commutation = false;      // Pi_loc T == T* Pi_loc*
  double trace_residual = 0.0;
  double commutation_residual = 0.0;
  // max |Pi - Pi_loc| when the trace identity holds (direct confirmation)
  std::optional<double> exchange_match;
};

/// Criteria deciding whether the impedance induces the local swap as its
/// exchange operator.
LocalityReport check_locality_criterion(const ImpedanceOperator& t);

/// Per-subdomain LU factorizations of the Robin operators A_j - i B_j* T_j B_j,
/// invertible for every coercive impedance.
class RobinFactorization {
 public:
  RobinFactorization(const FemSystem& fem, const ImpedanceOperator& impedance);

  const TraceSpaces& spaces() const { return *spaces_; }
  /// Solve (A - i B* T B) u = rhs for a broken functional rhs.
  BrokenVector solve(const BrokenVector& rhs) const;

 private:
  const TraceSpaces* spaces_;
  std::vector<LuFactorization> blocks_;
};

RobinFactorization factorize_robin(const FemSystem& fem, const ImpedanceOperator& impedance);

/// Scattering operator S = Id + 2i Ts B (A - i B* T B)^-1 B*, mapping incoming
/// impedance traces to outgoing ones subdomain by subdomain. Satisfies the
/// energy identity ||S p||^2 + 4 |Im<Au, u_bar>| = ||p||^2 in the Ts^-1 norm.
class ScatteringOperator {
 public:
  ScatteringOperator(const FemSystem& fem, const ImpedanceOperator& impedance);

  const ImpedanceOperator& impedance() const { return *t_; }
  const TraceSpaces& spaces() const { return t_->spaces(); }
  const RobinFactorization& robin() const { return robin_; }
  const FemSystem& fem() const { return *fem_; }

  MultiTraceDual apply(const MultiTraceDual& p) const;

  struct Detailed {
    MultiTraceDual scattered;
    BrokenVector volume;  // u = (A - i B* T B)^-1 B* p
  };
  Detailed apply_detailed(const MultiTraceDual& p) const;

  /// |lhs - rhs| / rhs for the energy identity, rhs = ||p||^2_{Ts^-1}.
  double energy_identity_residual(const MultiTraceDual& p) const;

  ComplexMatrix dense() const;

 private:
  const FemSystem* fem_;
  const ImpedanceOperator* t_;
  RobinFactorization robin_;
};

/// Im <A u, u_bar> over the broken space (nonpositive under absorption).
double absorption_term(const FemSystem& fem, const TraceSpaces& spaces, const BrokenVector& u);

/// || -p + iT u - Pi(p + iT* u) ||_{Ts^-1} relative to ||p||_{Ts^-1} + ||u||_Ts.
double transmission_residual(const MultiTracePrimal& u, const MultiTraceDual& p,
                             const ExchangeOperator& pi);

/// Transmission-condition test: (u, p) in X_h(Sigma) x X_h(Sigma)^o iff
/// -p + i T u = Pi(p + i T* u), up to tol relative to the natural scale.
bool check_transmission_characterization(const MultiTracePrimal& u, const MultiTraceDual& p,
                                         const ExchangeOperator& pi, double tol = 1e-9);

/// || p + iT* v - S(p - iT v) ||_{Ts^-1} relative to ||p||_{Ts^-1} + ||v||_Ts.
double cauchy_residual(const MultiTracePrimal& v, const MultiTraceDual& p,
                       const ScatteringOperator& s);

/// Cauchy-data test: (v, p) in C_h(Sigma) iff p + i T* v = S(p - i T v).
bool check_cauchy_characterization(const MultiTracePrimal& v, const MultiTraceDual& p,
                                   const ScatteringOperator& s, double tol = 1e-9);

/// Constructive member of the discrete Cauchy space from an arbitrary dual
/// seed: u = (A - iB*TB)^-1 B* q, v = B u, p = q + i T v.
struct CauchyPair {
  MultiTracePrimal dirichlet;
  MultiTraceDual neumann;
};
CauchyPair make_cauchy_pair(const ScatteringOperator& s, const MultiTraceDual& seed);

/// Text interchange dump, one "row col re im" line per entry.
void write_dense_operator(std::ostream& out, const ComplexMatrix& m);

}  // namespace helmdd
