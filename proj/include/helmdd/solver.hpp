#pragma once

#include <iosfwd>
#include <utility>

#include "helmdd/operators.hpp"

namespace helmdd {

struct SolveConfig {
  enum class Method { Richardson, Gmres };
  Method method = Method::Richardson;
  double relax = 1.0 / 1.4142135623730951;  // alpha
  double tol = 1e-6;
  int maxit = 20000;
  int restart = 200;
  bool record_iterates = false;  // diagnostic, small runs only

  void validate() const;
};

struct ConvergenceHistory {
  std::vector<std::pair<int, double>> residuals;  // (iter, res(n))
  bool converged = false;
  int iterations = 0;
  std::vector<ComplexVector> iterates;  // q^(n) when record_iterates
};

struct SolveResult {
  MultiTraceDual solution;
  ConvergenceHistory history;
};

/// The assembled skeleton formulation (Id + Pi S) q = g.
class SkeletonSystem {
 public:
  SkeletonSystem(const ExchangeOperator& exchange, const ScatteringOperator& scattering)
      : pi_(&exchange), s_(&scattering) {}

  const ExchangeOperator& exchange() const { return *pi_; }
  const ScatteringOperator& scattering() const { return *s_; }
  const ImpedanceOperator& impedance() const { return s_->impedance(); }
  const TraceSpaces& spaces() const { return s_->spaces(); }

  /// (Id + Pi S) q: one scattering fan-out plus one skeleton solve.
  MultiTraceDual apply(const MultiTraceDual& q) const;

  /// g = -2i Pi Ts B (A - i B* T B)^-1 f.
  MultiTraceDual compute_rhs(const BrokenVector& f) const;

  ComplexMatrix dense() const;

 private:
  const ExchangeOperator* pi_;
  const ScatteringOperator* s_;
};

SolveResult richardson_solve(const SkeletonSystem& system, const MultiTraceDual& g,
                             const SolveConfig& config);

/// GMRES with modified Gram-Schmidt in the Ts^-1 inner product; res(n) is
/// recomputed from the actual iterate, not the least-squares estimate.
SolveResult gmres_solve(const SkeletonSystem& system, const MultiTraceDual& g,
                        const SolveConfig& config);

SolveResult solve(const SkeletonSystem& system, const MultiTraceDual& g, const SolveConfig& config);

/// Volume and Neumann data from a skeleton solution:
/// u = (A - i B* T B)^-1 (B* q + f), p = q + i T B u.
struct Reconstruction {
  BrokenVector volume;
  MultiTraceDual neumann;
};
Reconstruction reconstruct(const SkeletonSystem& system, const MultiTraceDual& q,
                           const BrokenVector& f);

/// Direct solve of the global conforming system; the ground-truth oracle.
/// Throws when the conforming matrix is singular to working precision.
ComplexVector monolithic_solve(const Mesh& mesh, const MediumSpec& medium,
                               const SourceSpec& source);

/// Conforming vector obtained by averaging duplicated interface dofs, plus
/// the largest pairwise interface mismatch (diagnostic only).
struct GlueResult {
  ComplexVector conforming;
  double max_jump = 0.0;
};
GlueResult glue(const TraceSpaces& spaces, const BrokenVector& u);

/// || u - E ref ||_H1 / || E ref ||_H1 over the broken space.
double relative_h1_error(const FemSystem& fem, const TraceSpaces& spaces, const BrokenVector& u,
                         const ComplexVector& ref_conforming);

void write_history_csv(std::ostream& out, const ConvergenceHistory& history);
void write_solution_csv(std::ostream& out, const ComplexVector& u);
void write_solution_vtk(std::ostream& out, const Mesh& mesh, const ComplexVector& u);

}  // namespace helmdd
