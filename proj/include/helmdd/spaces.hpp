#pragma once

#include <vector>

#include "helmdd/linalg.hpp"
#include "helmdd/mesh.hpp"

namespace helmdd {

/// Offsets of per-subdomain coefficient blocks inside one flat vector.
struct BlockLayout {
  std::vector<int> offsets;  // size J+1, offsets.back() == total

  int block_count() const { return static_cast<int>(offsets.size()) - 1; }
  int total() const { return offsets.back(); }
  int block_size(int j) const { return offsets[j + 1] - offsets[j]; }

  auto seg(ComplexVector& v, int j) const { return v.segment(offsets[j], block_size(j)); }
  auto seg(const ComplexVector& v, int j) const { return v.segment(offsets[j], block_size(j)); }
};

/// Element of the broken volume space: one coefficient block per subdomain,
/// stored flat. Also used for functionals on that space (canonical dual
/// basis, bilinear pairing).
struct BrokenVector {
  ComplexVector coeffs;

  BrokenVector() = default;
  explicit BrokenVector(ComplexVector c) : coeffs(std::move(c)) {}
  static BrokenVector zero(int n) { return BrokenVector(ComplexVector::Zero(n)); }
};

struct PrimalTag {};
struct DualTag {};

/// Multi-trace coefficient tuple; the tag keeps Dirichlet data (primal) and
/// Neumann data (dual) apart at compile time. All pairings are bilinear;
/// Gram distinctions are carried by explicit Ts / Ts^-1 matrices.
template <class Tag>
struct Trace {
  ComplexVector coeffs;

  Trace() = default;
  explicit Trace(ComplexVector c) : coeffs(std::move(c)) {}
  static Trace zero(int n) { return Trace(ComplexVector::Zero(n)); }

  Trace& operator+=(const Trace& o) {
    coeffs += o.coeffs;
    return *this;
  }
  Trace& operator-=(const Trace& o) {
    coeffs -= o.coeffs;
    return *this;
  }
  Trace& operator*=(Complex s) {
    coeffs *= s;
    return *this;
  }
  friend Trace operator+(Trace a, const Trace& b) { return a += b; }
  friend Trace operator-(Trace a, const Trace& b) { return a -= b; }
  friend Trace operator-(const Trace& a) { return Trace(-a.coeffs); }
  friend Trace operator*(Complex s, Trace a) { return a *= s; }
};

using MultiTracePrimal = Trace<PrimalTag>;
using MultiTraceDual = Trace<DualTag>;

/// Single-valued function on the skeleton (one value per dof(Sigma)).
struct SkeletonVector {
  ComplexVector values;

  SkeletonVector() = default;
  explicit SkeletonVector(ComplexVector v) : values(std::move(v)) {}
  static SkeletonVector zero(int n) { return SkeletonVector(ComplexVector::Zero(n)); }
};

/// Bilinear (unconjugated) duality pairing <p, v> = sum p_i v_i.
inline Complex pair(const MultiTraceDual& p, const MultiTracePrimal& v) {
  return p.coeffs.transpose() * v.coeffs;
}
inline Complex pair(const BrokenVector& f, const BrokenVector& u) {
  return f.coeffs.transpose() * u.coeffs;
}

class ImpedanceOperator;  // impedance.hpp

/// Index maps between the broken volume space, the multi-trace space and the
/// skeleton space, together with the actions of B, B*, R, R*. All blocks are
/// ordered by ascending global vertex index. Immutable after construction.
class TraceSpaces {
 public:
  explicit TraceSpaces(const SubdomainTopology& topology);

  const SubdomainTopology& topology() const { return *topology_; }
  int subdomain_count() const { return volume_layout_.block_count(); }
  const BlockLayout& volume_layout() const { return volume_layout_; }
  const BlockLayout& trace_layout() const { return trace_layout_; }
  int skeleton_size() const { return static_cast<int>(skeleton_dofs_.size()); }
  int conforming_size() const { return topology().mesh->vertex_count(); }

  const std::vector<int>& volume_dofs(int j) const { return volume_dofs_[j]; }
  const std::vector<int>& boundary_dofs(int j) const { return boundary_dofs_[j]; }
  const std::vector<int>& boundary_to_volume(int j) const { return boundary_to_volume_[j]; }
  const std::vector<int>& boundary_to_skeleton(int j) const { return boundary_to_skeleton_[j]; }
  const Eigen::VectorXd& multiplicity() const { return multiplicity_; }

  /// B: restriction of each volume block to its subdomain boundary.
  MultiTracePrimal apply_trace(const BrokenVector& u) const;
  /// B*: scatter of boundary functionals into volume dof slots.
  BrokenVector apply_trace_adjoint(const MultiTraceDual& p) const;
  /// R: copy of skeleton values into every Gamma_j block.
  MultiTracePrimal apply_restriction(const SkeletonVector& w) const;
  /// R*: per-dof sum over the subdomains containing it.
  SkeletonVector apply_restriction_adjoint(const MultiTraceDual& p) const;

  /// E: conforming coefficient vector to broken blocks; E^T is its adjoint
  /// on functionals. X_h(Omega) = Range(E).
  BrokenVector scatter_conforming(const ComplexVector& u) const;
  ComplexVector gather_conforming(const BrokenVector& f) const;

  ComplexMatrix restriction_matrix() const;  // dense R, trace x skeleton

 private:
  const SubdomainTopology* topology_;
  BlockLayout volume_layout_;
  BlockLayout trace_layout_;
  std::vector<std::vector<int>> volume_dofs_;
  std::vector<std::vector<int>> boundary_dofs_;
  std::vector<std::vector<int>> boundary_to_volume_;
  std::vector<std::vector<int>> boundary_to_skeleton_;
  std::vector<int> skeleton_dofs_;
  Eigen::VectorXd multiplicity_;
};

/// Ts^-1-stable projection onto the polar space X_h(Sigma)^o = Ker(R*):
/// q = p - T* R (R* T* R)^-1 R* p. Defined with the impedance module.
MultiTraceDual project_onto_polar(const MultiTraceDual& p, const ImpedanceOperator& t);

}  // namespace helmdd
