#include "helmdd/impedance.hpp"

#include <algorithm>
#include <cmath>

namespace helmdd {

namespace {

constexpr double coercivity_threshold = 1e-12;

ComplexMatrix second_order_block(const FemSystem& fem, int j) {
  const double akappa = std::abs(fem.medium.kappa);
  if (!(akappa > 0.0)) throw Error("second-order impedance requires |kappa| > 0");
  return fem.subdomains[j].boundary_stiffness / (2.0 * akappa) +
         akappa * fem.subdomains[j].boundary_mass;
}

ComplexMatrix reference_block(ReferenceKind kind, const FemSystem& fem, int j, Eigen::Index n) {
  switch (kind) {
    case ReferenceKind::IdentityD:
      return ComplexMatrix::Identity(n, n);
    case ReferenceKind::Mass:
      return fem.subdomains[j].boundary_mass;
    case ReferenceKind::SecondOrder:
      return second_order_block(fem, j);
  }
  throw Error("unknown reference kind");
}

// Assemble sum_j R_j^T M_j R_j on the skeleton dofs.
ComplexMatrix skeleton_galerkin(const TraceSpaces& spaces,
                                const std::vector<ComplexMatrix>& blocks) {
  const int n = spaces.skeleton_size();
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    const auto& map = spaces.boundary_to_skeleton(j);
    const ComplexMatrix& m = blocks[j];
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) s(map[a], map[b]) += m(a, b);
  }
  return s;
}

}  // namespace

void ImpedanceSpec::validate(int subdomain_count) const {
  switch (kind) {
    case ImpedanceKind::IdentityD:
    case ImpedanceKind::SecondOrder:
      break;
    case ImpedanceKind::ScaledMass:
    case ImpedanceKind::ScaledReference:
      if (!(z.real() > 0.0))
        throw Error("impedance spec: Re z must be positive for scaled kinds");
      break;
    case ImpedanceKind::RotatedSecondOrder:
      if (!(theta > -M_PI / 2.0 && theta < M_PI / 2.0))
        throw Error("impedance spec: theta must lie in (-pi/2, pi/2)");
      break;
    case ImpedanceKind::PerSubdomainScaledMass:
      if (static_cast<int>(z_per_subdomain.size()) != subdomain_count)
        throw Error("impedance spec: need one z per subdomain");
      for (const Complex& zj : z_per_subdomain)
        if (!(zj.real() > 0.0))
          throw Error("impedance spec: Re z_j must be positive for every subdomain");
      break;
  }
}

ImpedanceSpec ImpedanceSpec::identity() { return {}; }

ImpedanceSpec ImpedanceSpec::scaled_mass(Complex z) {
  ImpedanceSpec s;
  s.kind = ImpedanceKind::ScaledMass;
  s.z = z;
  return s;
}

ImpedanceSpec ImpedanceSpec::second_order() {
  ImpedanceSpec s;
  s.kind = ImpedanceKind::SecondOrder;
  return s;
}

ImpedanceSpec ImpedanceSpec::rotated_second_order(double theta) {
  ImpedanceSpec s;
  s.kind = ImpedanceKind::RotatedSecondOrder;
  s.theta = theta;
  return s;
}

ImpedanceSpec ImpedanceSpec::scaled_reference(Complex z, ReferenceKind reference) {
  ImpedanceSpec s;
  s.kind = ImpedanceKind::ScaledReference;
  s.z = z;
  s.reference = reference;
  return s;
}

ImpedanceSpec ImpedanceSpec::per_subdomain_scaled_mass(std::vector<Complex> z) {
  ImpedanceSpec s;
  s.kind = ImpedanceKind::PerSubdomainScaledMass;
  s.z_per_subdomain = std::move(z);
  return s;
}

std::vector<ComplexMatrix> assemble_impedance_blocks(const ImpedanceSpec& spec,
                                                     const SubdomainTopology& topo,
                                                     const FemSystem& fem) {
  const int j_count = topo.subdomain_count();
  std::vector<ComplexMatrix> blocks(j_count);
  for (int j = 0; j < j_count; ++j) {
    const Eigen::Index n = static_cast<Eigen::Index>(topo.subdomains[j].boundary_dofs.size());
    switch (spec.kind) {
      case ImpedanceKind::IdentityD:
        blocks[j] = ComplexMatrix::Identity(n, n);
        break;
      case ImpedanceKind::ScaledMass:
        blocks[j] = spec.z * fem.subdomains[j].boundary_mass;
        break;
      case ImpedanceKind::SecondOrder:
        blocks[j] = second_order_block(fem, j);
        break;
      case ImpedanceKind::RotatedSecondOrder:
        blocks[j] = std::exp(Complex(0.0, -spec.theta)) * second_order_block(fem, j);
        break;
      case ImpedanceKind::ScaledReference:
        blocks[j] = spec.z * reference_block(spec.reference, fem, j, n);
        break;
      case ImpedanceKind::PerSubdomainScaledMass:
        blocks[j] = spec.z_per_subdomain.at(j) * fem.subdomains[j].boundary_mass;
        break;
    }
  }
  return blocks;
}

CoercivityReport verify_coercivity(const std::vector<ComplexMatrix>& t_blocks,
                                   const std::vector<ComplexMatrix>& mass_blocks) {
  CoercivityReport report;
  report.min_rayleigh = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t_blocks.size(); ++j) {
    ComplexMatrix sym = 0.5 * (t_blocks[j] + t_blocks[j].adjoint());
    auto eig = extremal_generalized_eig(sym, mass_blocks[j]);
    report.min_rayleigh = std::min(report.min_rayleigh, eig.lambda_min);
  }
  report.coercive = report.min_rayleigh > coercivity_threshold;
  return report;
}

ImpedanceOperator::ImpedanceOperator(std::vector<ComplexMatrix> blocks, const TraceSpaces& spaces)
    : spaces_(&spaces), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != spaces.subdomain_count())
    throw DimensionError("ImpedanceOperator: one block per subdomain required");
  for (int j = 0; j < block_count(); ++j) {
    if (blocks_[j].rows() != spaces.trace_layout().block_size(j))
      throw DimensionError("ImpedanceOperator: block " + std::to_string(j) + " size mismatch");
    sym_blocks_.push_back(0.5 * (blocks_[j] + blocks_[j].adjoint()));
  }
  for (int j = 0; j < block_count(); ++j) {
    try {
      sym_factors_.emplace_back(sym_blocks_[j]);
    } catch (const NotPositiveDefiniteError& e) {
      throw CoercivityError("impedance symmetric part is not positive definite on subdomain " +
                                std::to_string(j) + ": " + e.what(),
                            0.0);
    }
  }
  skeleton_adjoint_lu_ = std::make_unique<LuFactorization>(
      skeleton_galerkin(spaces, [&] {
        std::vector<ComplexMatrix> adj(blocks_.size());
        for (std::size_t j = 0; j < blocks_.size(); ++j) adj[j] = blocks_[j].adjoint();
        return adj;
      }()));
  skeleton_lu_ = std::make_unique<LuFactorization>(skeleton_galerkin(spaces, blocks_));
}

MultiTraceDual ImpedanceOperator::apply(const MultiTracePrimal& v) const {
  MultiTraceDual out = MultiTraceDual::zero(v.coeffs.size());
  const auto& layout = spaces_->trace_layout();
  for (int j = 0; j < block_count(); ++j)
    layout.seg(out.coeffs, j) = blocks_[j] * layout.seg(v.coeffs, j);
  return out;
}

MultiTraceDual ImpedanceOperator::apply_adjoint(const MultiTracePrimal& v) const {
  MultiTraceDual out = MultiTraceDual::zero(v.coeffs.size());
  const auto& layout = spaces_->trace_layout();
  for (int j = 0; j < block_count(); ++j)
    layout.seg(out.coeffs, j) = blocks_[j].adjoint() * layout.seg(v.coeffs, j);
  return out;
}

MultiTraceDual ImpedanceOperator::apply_sym(const MultiTracePrimal& v) const {
  MultiTraceDual out = MultiTraceDual::zero(v.coeffs.size());
  const auto& layout = spaces_->trace_layout();
  for (int j = 0; j < block_count(); ++j)
    layout.seg(out.coeffs, j) = sym_blocks_[j] * layout.seg(v.coeffs, j);
  return out;
}

MultiTracePrimal ImpedanceOperator::solve_sym(const MultiTraceDual& p) const {
  MultiTracePrimal out = MultiTracePrimal::zero(p.coeffs.size());
  const auto& layout = spaces_->trace_layout();
  for (int j = 0; j < block_count(); ++j)
    layout.seg(out.coeffs, j) = sym_factors_[j].solve(layout.seg(p.coeffs, j).eval());
  return out;
}

double ImpedanceOperator::norm_ts(const MultiTracePrimal& v) const {
  const auto& layout = spaces_->trace_layout();
  double sq = 0.0;
  for (int j = 0; j < block_count(); ++j) {
    auto vj = layout.seg(v.coeffs, j);
    sq += (vj.adjoint() * (sym_blocks_[j] * vj)).value().real();
  }
  return std::sqrt(std::max(sq, 0.0));
}

double ImpedanceOperator::norm_ts_dual(const MultiTraceDual& p) const {
  const auto& layout = spaces_->trace_layout();
  double sq = 0.0;
  for (int j = 0; j < block_count(); ++j) {
    auto pj = layout.seg(p.coeffs, j);
    sq += (pj.adjoint() * sym_factors_[j].solve(pj.eval())).value().real();
  }
  return std::sqrt(std::max(sq, 0.0));
}

SkeletonVector ImpedanceOperator::solve_skeleton_adjoint(const SkeletonVector& rhs) const {
  return SkeletonVector(skeleton_adjoint_lu_->solve(rhs.values));
}

SkeletonVector ImpedanceOperator::solve_skeleton(const SkeletonVector& rhs) const {
  return SkeletonVector(skeleton_lu_->solve(rhs.values));
}

ComplexMatrix ImpedanceOperator::dense() const {
  const auto& layout = spaces_->trace_layout();
  ComplexMatrix t = ComplexMatrix::Zero(layout.total(), layout.total());
  for (int j = 0; j < block_count(); ++j)
    t.block(layout.offsets[j], layout.offsets[j], layout.block_size(j), layout.block_size(j)) =
        blocks_[j];
  return t;
}

ComplexMatrix ImpedanceOperator::dense_sym() const {
  const auto& layout = spaces_->trace_layout();
  ComplexMatrix t = ComplexMatrix::Zero(layout.total(), layout.total());
  for (int j = 0; j < block_count(); ++j)
    t.block(layout.offsets[j], layout.offsets[j], layout.block_size(j), layout.block_size(j)) =
        sym_blocks_[j];
  return t;
}

ComplexMatrix ImpedanceOperator::dense_sym_inverse() const {
  const auto& layout = spaces_->trace_layout();
  ComplexMatrix t = ComplexMatrix::Zero(layout.total(), layout.total());
  for (int j = 0; j < block_count(); ++j)
    t.block(layout.offsets[j], layout.offsets[j], layout.block_size(j), layout.block_size(j)) =
        sym_factors_[j].inverse();
  return t;
}

bool ImpedanceOperator::is_hermitian(double tol) const {
  double defect = 0.0, scale = 0.0;
  for (const auto& b : blocks_) {
    defect = std::max(defect, (b - b.adjoint().eval()).cwiseAbs().maxCoeff());
    scale = std::max(scale, b.cwiseAbs().maxCoeff());
  }
  return defect <= tol * std::max(scale, 1e-300);
}

ImpedanceOperator build_impedance(const ImpedanceSpec& spec, const TraceSpaces& spaces,
                                  const FemSystem& fem) {
  spec.validate(spaces.subdomain_count());
  auto blocks = assemble_impedance_blocks(spec, spaces.topology(), fem);
  std::vector<ComplexMatrix> mass(blocks.size());
  for (std::size_t j = 0; j < blocks.size(); ++j) mass[j] = fem.subdomains[j].boundary_mass;
  auto report = verify_coercivity(blocks, mass);
  if (!report.coercive)
    throw CoercivityError("impedance is not coercive (min Rayleigh quotient " +
                              std::to_string(report.min_rayleigh) + ")",
                          report.min_rayleigh);
  return ImpedanceOperator(std::move(blocks), spaces);
}

ImpedanceOperator build_impedance_from_blocks(std::vector<ComplexMatrix> blocks,
                                              const TraceSpaces& spaces) {
  return ImpedanceOperator(std::move(blocks), spaces);
}

MultiTraceDual project_onto_polar(const MultiTraceDual& p, const ImpedanceOperator& t) {
  const TraceSpaces& spaces = t.spaces();
  SkeletonVector restricted = spaces.apply_restriction_adjoint(p);
  SkeletonVector w = t.solve_skeleton_adjoint(restricted);
  MultiTraceDual correction = t.apply_adjoint(spaces.apply_restriction(w));
  return p - correction;
}

PrimalDecomposition decompose_primal(const MultiTracePrimal& v, const ImpedanceOperator& t) {
  const TraceSpaces& spaces = t.spaces();
  SkeletonVector rhs = spaces.apply_restriction_adjoint(t.apply(v));
  SkeletonVector w = t.solve_skeleton(rhs);
  PrimalDecomposition split;
  split.single_trace = spaces.apply_restriction(w);
  split.remainder = v - split.single_trace;
  return split;
}

}  // namespace helmdd
