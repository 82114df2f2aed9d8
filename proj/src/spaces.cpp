#include "helmdd/spaces.hpp"

#include <algorithm>
#include <map>

namespace helmdd {

TraceSpaces::TraceSpaces(const SubdomainTopology& topology) : topology_(&topology) {
  const int j_count = topology.subdomain_count();
  skeleton_dofs_ = topology.skeleton_dofs;

  std::map<int, int> skeleton_index;
  for (int i = 0; i < static_cast<int>(skeleton_dofs_.size()); ++i)
    skeleton_index[skeleton_dofs_[i]] = i;

  volume_layout_.offsets.assign(1, 0);
  trace_layout_.offsets.assign(1, 0);
  volume_dofs_.resize(j_count);
  boundary_dofs_.resize(j_count);
  boundary_to_volume_.resize(j_count);
  boundary_to_skeleton_.resize(j_count);

  for (int j = 0; j < j_count; ++j) {
    const auto& sub = topology.subdomains[j];
    volume_dofs_[j] = sub.vertices;          // ascending by construction
    boundary_dofs_[j] = sub.boundary_dofs;   // ascending by construction

    std::map<int, int> local_volume;
    for (int i = 0; i < static_cast<int>(sub.vertices.size()); ++i)
      local_volume[sub.vertices[i]] = i;

    boundary_to_volume_[j].reserve(sub.boundary_dofs.size());
    boundary_to_skeleton_[j].reserve(sub.boundary_dofs.size());
    for (int v : sub.boundary_dofs) {
      boundary_to_volume_[j].push_back(local_volume.at(v));
      boundary_to_skeleton_[j].push_back(skeleton_index.at(v));
    }

    volume_layout_.offsets.push_back(volume_layout_.offsets.back() +
                                     static_cast<int>(sub.vertices.size()));
    trace_layout_.offsets.push_back(trace_layout_.offsets.back() +
                                    static_cast<int>(sub.boundary_dofs.size()));
  }

  multiplicity_.resize(skeleton_dofs_.size());
  for (int i = 0; i < static_cast<int>(skeleton_dofs_.size()); ++i)
    multiplicity_(i) = topology.multiplicity[i];
}

MultiTracePrimal TraceSpaces::apply_trace(const BrokenVector& u) const {
  if (u.coeffs.size() != volume_layout_.total())
    throw DimensionError("apply_trace: broken vector size mismatch");
  MultiTracePrimal out = MultiTracePrimal::zero(trace_layout_.total());
  for (int j = 0; j < subdomain_count(); ++j) {
    const auto& map = boundary_to_volume_[j];
    auto src = volume_layout_.seg(u.coeffs, j);
    auto dst = trace_layout_.seg(out.coeffs, j);
    for (int i = 0; i < static_cast<int>(map.size()); ++i) dst(i) = src(map[i]);
  }
  return out;
}

BrokenVector TraceSpaces::apply_trace_adjoint(const MultiTraceDual& p) const {
  if (p.coeffs.size() != trace_layout_.total())
    throw DimensionError("apply_trace_adjoint: multi-trace size mismatch");
  BrokenVector out = BrokenVector::zero(volume_layout_.total());
  for (int j = 0; j < subdomain_count(); ++j) {
    const auto& map = boundary_to_volume_[j];
    auto src = trace_layout_.seg(p.coeffs, j);
    auto dst = volume_layout_.seg(out.coeffs, j);
    for (int i = 0; i < static_cast<int>(map.size()); ++i) dst(map[i]) += src(i);
  }
  return out;
}

MultiTracePrimal TraceSpaces::apply_restriction(const SkeletonVector& w) const {
  if (w.values.size() != skeleton_size())
    throw DimensionError("apply_restriction: skeleton vector size mismatch");
  MultiTracePrimal out = MultiTracePrimal::zero(trace_layout_.total());
  for (int j = 0; j < subdomain_count(); ++j) {
    const auto& map = boundary_to_skeleton_[j];
    auto dst = trace_layout_.seg(out.coeffs, j);
    for (int i = 0; i < static_cast<int>(map.size()); ++i) dst(i) = w.values(map[i]);
  }
  return out;
}

SkeletonVector TraceSpaces::apply_restriction_adjoint(const MultiTraceDual& p) const {
  if (p.coeffs.size() != trace_layout_.total())
    throw DimensionError("apply_restriction_adjoint: multi-trace size mismatch");
  SkeletonVector out = SkeletonVector::zero(skeleton_size());
  for (int j = 0; j < subdomain_count(); ++j) {
    const auto& map = boundary_to_skeleton_[j];
    auto src = trace_layout_.seg(p.coeffs, j);
    for (int i = 0; i < static_cast<int>(map.size()); ++i) out.values(map[i]) += src(i);
  }
  return out;
}

BrokenVector TraceSpaces::scatter_conforming(const ComplexVector& u) const {
  if (u.size() != conforming_size())
    throw DimensionError("scatter_conforming: conforming vector size mismatch");
  BrokenVector out = BrokenVector::zero(volume_layout_.total());
  for (int j = 0; j < subdomain_count(); ++j) {
    auto dst = volume_layout_.seg(out.coeffs, j);
    const auto& dofs = volume_dofs_[j];
    for (int i = 0; i < static_cast<int>(dofs.size()); ++i) dst(i) = u(dofs[i]);
  }
  return out;
}

ComplexVector TraceSpaces::gather_conforming(const BrokenVector& f) const {
  if (f.coeffs.size() != volume_layout_.total())
    throw DimensionError("gather_conforming: broken vector size mismatch");
  ComplexVector out = ComplexVector::Zero(conforming_size());
  for (int j = 0; j < subdomain_count(); ++j) {
    auto src = volume_layout_.seg(f.coeffs, j);
    const auto& dofs = volume_dofs_[j];
    for (int i = 0; i < static_cast<int>(dofs.size()); ++i) out(dofs[i]) += src(i);
  }
  return out;
}

ComplexMatrix TraceSpaces::restriction_matrix() const {
  ComplexMatrix r = ComplexMatrix::Zero(trace_layout_.total(), skeleton_size());
  for (int j = 0; j < subdomain_count(); ++j) {
    const auto& map = boundary_to_skeleton_[j];
    for (int i = 0; i < static_cast<int>(map.size()); ++i)
      r(trace_layout_.offsets[j] + i, map[i]) = 1.0;
  }
  return r;
}

}  // namespace helmdd
