#include "helmdd/operators.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace helmdd {

namespace {

const Complex i_unit(0.0, 1.0);

void check_densify(int n, const char* who) {
  if (n > densify_cap)
    throw Error(std::string(who) + ": refusing to densify " + std::to_string(n) +
                " multi-trace dofs (cap " + std::to_string(densify_cap) + ")");
}

}  // namespace

MultiTraceDual ExchangeOperator::apply(const MultiTraceDual& p) const {
  const TraceSpaces& sp = spaces();
  SkeletonVector restricted = sp.apply_restriction_adjoint(p);
  SkeletonVector w = t_->solve_skeleton_adjoint(restricted);
  MultiTraceDual sym = t_->apply_sym(sp.apply_restriction(w));
  return MultiTraceDual(2.0 * sym.coeffs - p.coeffs);
}

MultiTraceDual ExchangeOperator::apply_inverse(const MultiTraceDual& p) const {
  const TraceSpaces& sp = spaces();
  SkeletonVector restricted = sp.apply_restriction_adjoint(p);
  SkeletonVector w = t_->solve_skeleton(restricted);
  MultiTraceDual sym = t_->apply_sym(sp.apply_restriction(w));
  return MultiTraceDual(2.0 * sym.coeffs - p.coeffs);
}

ComplexMatrix ExchangeOperator::dense() const {
  const int n = spaces().trace_layout().total();
  check_densify(n, "ExchangeOperator::dense");
  ComplexMatrix out(n, n);
  MultiTraceDual e = MultiTraceDual::zero(n);
  for (int c = 0; c < n; ++c) {
    e.coeffs.setZero();
    e.coeffs(c) = 1.0;
    out.col(c) = apply(e).coeffs;
  }
  return out;
}

MultiTraceDual apply_local_swap(const TraceSpaces& spaces, const MultiTraceDual& p) {
  SkeletonVector sums = spaces.apply_restriction_adjoint(p);
  MultiTraceDual out = MultiTraceDual::zero(p.coeffs.size());
  const auto& layout = spaces.trace_layout();
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    const auto& map = spaces.boundary_to_skeleton(j);
    auto src = layout.seg(p.coeffs, j);
    auto dst = layout.seg(out.coeffs, j);
    for (int i = 0; i < static_cast<int>(map.size()); ++i)
      dst(i) = -src(i) + (2.0 / spaces.multiplicity()(map[i])) * sums.values(map[i]);
  }
  return out;
}

ComplexMatrix local_swap_matrix(const TraceSpaces& spaces) {
  const int n = spaces.trace_layout().total();
  check_densify(n, "local_swap_matrix");
  // positions of each skeleton dof inside the stacked multi-trace vector
  std::vector<std::vector<int>> positions(spaces.skeleton_size());
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    const auto& map = spaces.boundary_to_skeleton(j);
    for (int i = 0; i < static_cast<int>(map.size()); ++i)
      positions[map[i]].push_back(spaces.trace_layout().offsets[j] + i);
  }
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  for (int x = 0; x < spaces.skeleton_size(); ++x) {
    const double w = 2.0 / spaces.multiplicity()(x);
    for (int a : positions[x])
      for (int b : positions[x]) m(a, b) += (a == b) ? w - 1.0 : w;
  }
  return m;
}

LocalityReport check_locality_criterion(const ImpedanceOperator& t) {
  const TraceSpaces& sp = t.spaces();
  LocalityReport report;

  ComplexMatrix t_dense = t.dense();
  ComplexMatrix r = sp.restriction_matrix();
  ComplexMatrix swap = local_swap_matrix(sp);

  ComplexMatrix tr = t_dense * r;
  ComplexMatrix lhs = swap * (t_dense.adjoint() * r).eval();
  const double tr_scale = std::max(tr.cwiseAbs().maxCoeff(), 1e-300);
  report.trace_residual = (lhs - tr).cwiseAbs().maxCoeff() / tr_scale;
  report.trace_identity = report.trace_residual <= 1e-11;

  ComplexMatrix comm = swap * t_dense - (t_dense.adjoint() * swap.adjoint()).eval();
  const double t_scale = std::max(t_dense.cwiseAbs().maxCoeff(), 1e-300);
  report.commutation_residual = comm.cwiseAbs().maxCoeff() / t_scale;
  report.commutation = report.commutation_residual <= 1e-11;

  if (report.trace_identity) {
    ExchangeOperator pi(t);
    report.exchange_match = (pi.dense() - swap).cwiseAbs().maxCoeff();
  }
  return report;
}

RobinFactorization::RobinFactorization(const FemSystem& fem, const ImpedanceOperator& impedance)
    : spaces_(&impedance.spaces()) {
  const TraceSpaces& sp = *spaces_;
  for (int j = 0; j < sp.subdomain_count(); ++j) {
    ComplexMatrix robin = fem.subdomains[j].helmholtz;
    const auto& b2v = sp.boundary_to_volume(j);
    const ComplexMatrix& tj = impedance.block(j);
    for (int a = 0; a < tj.rows(); ++a)
      for (int b = 0; b < tj.cols(); ++b) robin(b2v[a], b2v[b]) -= i_unit * tj(a, b);
    try {
      blocks_.emplace_back(std::move(robin));
    } catch (const SingularMatrixError& e) {
      throw SingularMatrixError("Robin subproblem " + std::to_string(j) +
                                    " is singular (violated assumptions?): " + e.what(),
                                e.pivot_index);
    }
  }
}

BrokenVector RobinFactorization::solve(const BrokenVector& rhs) const {
  const auto& layout = spaces_->volume_layout();
  if (rhs.coeffs.size() != layout.total())
    throw DimensionError("RobinFactorization::solve: rhs size mismatch");
  BrokenVector out = BrokenVector::zero(layout.total());
  for (int j = 0; j < layout.block_count(); ++j)
    layout.seg(out.coeffs, j) = blocks_[j].solve(layout.seg(rhs.coeffs, j).eval());
  return out;
}

RobinFactorization factorize_robin(const FemSystem& fem, const ImpedanceOperator& impedance) {
  return RobinFactorization(fem, impedance);
}

ScatteringOperator::ScatteringOperator(const FemSystem& fem, const ImpedanceOperator& impedance)
    : fem_(&fem), t_(&impedance), robin_(fem, impedance) {}

ScatteringOperator::Detailed ScatteringOperator::apply_detailed(const MultiTraceDual& p) const {
  const TraceSpaces& sp = spaces();
  Detailed result;
  result.volume = robin_.solve(sp.apply_trace_adjoint(p));
  MultiTraceDual outgoing = t_->apply_sym(sp.apply_trace(result.volume));
  result.scattered = MultiTraceDual(p.coeffs + 2.0 * i_unit * outgoing.coeffs);
  return result;
}

MultiTraceDual ScatteringOperator::apply(const MultiTraceDual& p) const {
  return apply_detailed(p).scattered;
}

double absorption_term(const FemSystem& fem, const TraceSpaces& spaces, const BrokenVector& u) {
  const auto& layout = spaces.volume_layout();
  Complex quad(0.0, 0.0);
  for (int j = 0; j < layout.block_count(); ++j) {
    auto uj = layout.seg(u.coeffs, j);
    quad += (uj.adjoint() * (fem.subdomains[j].helmholtz * uj)).value();
  }
  return quad.imag();
}

double ScatteringOperator::energy_identity_residual(const MultiTraceDual& p) const {
  Detailed d = apply_detailed(p);
  const double rhs = std::pow(t_->norm_ts_dual(p), 2);
  if (rhs == 0.0) return 0.0;
  const double lhs = std::pow(t_->norm_ts_dual(d.scattered), 2) +
                     4.0 * std::abs(absorption_term(*fem_, spaces(), d.volume));
  return std::abs(lhs - rhs) / rhs;
}

ComplexMatrix ScatteringOperator::dense() const {
  const int n = spaces().trace_layout().total();
  check_densify(n, "ScatteringOperator::dense");
  ComplexMatrix out(n, n);
  MultiTraceDual e = MultiTraceDual::zero(n);
  for (int c = 0; c < n; ++c) {
    e.coeffs.setZero();
    e.coeffs(c) = 1.0;
    out.col(c) = apply(e).coeffs;
  }
  return out;
}

double transmission_residual(const MultiTracePrimal& u, const MultiTraceDual& p,
                             const ExchangeOperator& pi) {
  const ImpedanceOperator& t = pi.impedance();
  MultiTraceDual lhs(-p.coeffs + i_unit * t.apply(u).coeffs);
  MultiTraceDual rhs = pi.apply(MultiTraceDual(p.coeffs + i_unit * t.apply_adjoint(u).coeffs));
  const double residual = t.norm_ts_dual(lhs - rhs);
  const double scale = t.norm_ts_dual(p) + t.norm_ts(u);
  return scale > 0.0 ? residual / scale : residual;
}

bool check_transmission_characterization(const MultiTracePrimal& u, const MultiTraceDual& p,
                                         const ExchangeOperator& pi, double tol) {
  return transmission_residual(u, p, pi) <= tol;
}

double cauchy_residual(const MultiTracePrimal& v, const MultiTraceDual& p,
                       const ScatteringOperator& s) {
  const ImpedanceOperator& t = s.impedance();
  MultiTraceDual lhs(p.coeffs + i_unit * t.apply_adjoint(v).coeffs);
  MultiTraceDual rhs = s.apply(MultiTraceDual(p.coeffs - i_unit * t.apply(v).coeffs));
  const double residual = t.norm_ts_dual(lhs - rhs);
  const double scale = t.norm_ts_dual(p) + t.norm_ts(v);
  return scale > 0.0 ? residual / scale : residual;
}

bool check_cauchy_characterization(const MultiTracePrimal& v, const MultiTraceDual& p,
                                   const ScatteringOperator& s, double tol) {
  return cauchy_residual(v, p, s) <= tol;
}

CauchyPair make_cauchy_pair(const ScatteringOperator& s, const MultiTraceDual& seed) {
  const TraceSpaces& sp = s.spaces();
  BrokenVector u = s.robin().solve(sp.apply_trace_adjoint(seed));
  CauchyPair pair;
  pair.dirichlet = sp.apply_trace(u);
  pair.neumann = MultiTraceDual(seed.coeffs + i_unit * s.impedance().apply(pair.dirichlet).coeffs);
  return pair;
}

void write_dense_operator(std::ostream& out, const ComplexMatrix& m) {
  char buf[96];
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g %.17g\n", static_cast<long>(r),
                    static_cast<long>(c), m(r, c).real(), m(r, c).imag());
      out << buf;
    }
}

}  // namespace helmdd
