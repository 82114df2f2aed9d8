#include "helmdd/constants.hpp"

#include <cmath>

namespace helmdd {

namespace {

const Complex i_unit(0.0, 1.0);

}  // namespace

HarmonicLifting::HarmonicLifting(const FemSystem& fem, const TraceSpaces& spaces)
    : spaces_(&spaces) {
  const int j_count = spaces.subdomain_count();
  interior_.resize(j_count);
  interior_to_boundary_.resize(j_count);
  lambda_.resize(j_count);

  for (int j = 0; j < j_count; ++j) {
    const ComplexMatrix& gram = fem.subdomains[j].h1_gram;
    const auto& b2v = spaces.boundary_to_volume(j);
    const int n = static_cast<int>(gram.rows());
    const int nb = static_cast<int>(b2v.size());

    std::vector<bool> is_boundary(n, false);
    for (int idx : b2v) is_boundary[idx] = true;
    for (int i = 0; i < n; ++i)
      if (!is_boundary[i]) interior_[j].push_back(i);
    const int ni = static_cast<int>(interior_[j].size());

    ComplexMatrix n_gg(nb, nb), n_ig(ni, nb), n_ii(ni, ni);
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b) n_gg(a, b) = gram(b2v[a], b2v[b]);
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < nb; ++b) n_ig(a, b) = gram(interior_[j][a], b2v[b]);
    for (int a = 0; a < ni; ++a)
      for (int b = 0; b < ni; ++b) n_ii(a, b) = gram(interior_[j][a], interior_[j][b]);

    if (ni == 0) {
      interior_to_boundary_[j] = ComplexMatrix::Zero(0, nb);
      lambda_[j] = n_gg;  // no interior dof: Lambda_j is the Gram itself
      continue;
    }
    HermitianFactorization interior_chol(n_ii);
    interior_to_boundary_[j] = interior_chol.solve(n_ig);
    ComplexMatrix schur = n_gg - n_ig.adjoint() * interior_to_boundary_[j];
    lambda_[j] = 0.5 * (schur + schur.adjoint());
  }
}

ComplexMatrix HarmonicLifting::lambda_dense() const {
  const auto& layout = spaces_->trace_layout();
  ComplexMatrix out = ComplexMatrix::Zero(layout.total(), layout.total());
  for (int j = 0; j < spaces_->subdomain_count(); ++j)
    out.block(layout.offsets[j], layout.offsets[j], layout.block_size(j), layout.block_size(j)) =
        lambda_[j];
  return out;
}

BrokenVector HarmonicLifting::apply(const MultiTracePrimal& v) const {
  const auto& trace_layout = spaces_->trace_layout();
  const auto& volume_layout = spaces_->volume_layout();
  if (v.coeffs.size() != trace_layout.total())
    throw DimensionError("HarmonicLifting::apply: multi-trace size mismatch");

  BrokenVector out = BrokenVector::zero(volume_layout.total());
  for (int j = 0; j < spaces_->subdomain_count(); ++j) {
    auto vj = trace_layout.seg(v.coeffs, j);
    auto uj = volume_layout.seg(out.coeffs, j);
    const auto& b2v = spaces_->boundary_to_volume(j);
    for (int i = 0; i < static_cast<int>(b2v.size()); ++i) uj(b2v[i]) = vj(i);
    if (!interior_[j].empty()) {
      ComplexVector ui = -(interior_to_boundary_[j] * vj);
      for (int i = 0; i < static_cast<int>(interior_[j].size()); ++i) uj(interior_[j][i]) = ui(i);
    }
  }
  return out;
}

double HarmonicLifting::lifting_norm(const MultiTracePrimal& v) const {
  const auto& layout = spaces_->trace_layout();
  double sq = 0.0;
  for (int j = 0; j < spaces_->subdomain_count(); ++j) {
    auto vj = layout.seg(v.coeffs, j);
    sq += (vj.adjoint() * (lambda_[j] * vj)).value().real();
  }
  return std::sqrt(std::max(sq, 0.0));
}

MultiTraceDual HarmonicLifting::apply_transpose(const BrokenVector& f) const {
  const auto& trace_layout = spaces_->trace_layout();
  const auto& volume_layout = spaces_->volume_layout();
  if (f.coeffs.size() != volume_layout.total())
    throw DimensionError("HarmonicLifting::apply_transpose: broken size mismatch");

  MultiTraceDual out = MultiTraceDual::zero(trace_layout.total());
  for (int j = 0; j < spaces_->subdomain_count(); ++j) {
    auto fj = volume_layout.seg(f.coeffs, j);
    auto pj = trace_layout.seg(out.coeffs, j);
    const auto& b2v = spaces_->boundary_to_volume(j);
    for (int i = 0; i < static_cast<int>(b2v.size()); ++i) pj(i) = fj(b2v[i]);
    if (!interior_[j].empty()) {
      ComplexVector fi(interior_[j].size());
      for (int i = 0; i < static_cast<int>(interior_[j].size()); ++i) fi(i) = fj(interior_[j][i]);
      // transpose, not adjoint: pairings are bilinear
      pj -= interior_to_boundary_[j].transpose() * fi;
    }
  }
  return out;
}

TraceBounds compute_trace_bounds(const ImpedanceOperator& t, const HarmonicLifting& lifting) {
  auto eig = extremal_generalized_eig(t.dense_sym(), lifting.lambda_dense());
  if (eig.lambda_min < 0.0) throw Error("compute_trace_bounds: negative Rayleigh quotient");
  return {std::sqrt(eig.lambda_min), std::sqrt(eig.lambda_max)};
}

double compute_skew_bound(const ImpedanceOperator& t) {
  ComplexMatrix dense = t.dense();
  ComplexMatrix skew = 0.5 * (dense - dense.adjoint());
  if (skew.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  return max_singular_in_norms(skew, t.dense_sym_inverse(), t.dense_sym());
}

double compute_infsup_alpha(const Mesh& mesh, const MediumSpec& medium) {
  ComplexMatrix a = assemble_conforming_helmholtz(mesh, medium);
  HermitianFactorization gram(assemble_conforming_gram(mesh, medium.kappa_star()));
  double alpha = min_singular_value(whiten_operator(a, gram));
  if (alpha <= 1e-12)
    throw Error("compute_infsup_alpha: conforming inf-sup constant vanishes; "
                "the discrete problem is not well posed");
  return alpha;
}

double compute_continuity(const FemSystem& fem, const TraceSpaces& spaces) {
  HermitianFactorization gram(fem.broken_h1_gram(spaces));
  return max_singular_value(whiten_operator(fem.broken_helmholtz(spaces), gram));
}

ComplexMatrix robin_dense(const FemSystem& fem, const ImpedanceOperator& t) {
  const TraceSpaces& spaces = t.spaces();
  const auto& layout = spaces.volume_layout();
  ComplexMatrix robin = fem.broken_helmholtz(spaces);
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    const auto& b2v = spaces.boundary_to_volume(j);
    const ComplexMatrix& tj = t.block(j);
    const int off = layout.offsets[j];
    for (int a = 0; a < tj.rows(); ++a)
      for (int b = 0; b < tj.cols(); ++b) robin(off + b2v[a], off + b2v[b]) -= i_unit * tj(a, b);
  }
  return robin;
}

double compute_beta(const FemSystem& fem, const ImpedanceOperator& t) {
  HermitianFactorization gram(fem.broken_h1_gram(t.spaces()));
  return min_singular_value(whiten_operator(robin_dense(fem, t), gram));
}

CauchyProjector::CauchyProjector(const FemSystem& fem, const TraceSpaces& spaces,
                                 const HarmonicLifting& lifting)
    : fem_(&fem),
      spaces_(&spaces),
      lifting_(&lifting),
      conforming_lu_(assemble_conforming_helmholtz(*spaces.topology().mesh, fem.medium)) {}

BrokenVector CauchyProjector::apply_helmholtz(const BrokenVector& u) const {
  const auto& layout = spaces_->volume_layout();
  BrokenVector out = BrokenVector::zero(layout.total());
  for (int j = 0; j < spaces_->subdomain_count(); ++j)
    layout.seg(out.coeffs, j) = fem_->subdomains[j].helmholtz * layout.seg(u.coeffs, j);
  return out;
}

std::pair<MultiTracePrimal, MultiTraceDual> CauchyProjector::apply(const MultiTracePrimal& v,
                                                                   const MultiTraceDual& p) const {
  // Continuous correction: find u_tilde in X_h(Omega) with
  //   <A(u_tilde + B' v), w> = <p, B w>   for all conforming w.
  BrokenVector lifted = lifting_->apply(v);
  BrokenVector rhs_broken(spaces_->apply_trace_adjoint(p).coeffs -
                          apply_helmholtz(lifted).coeffs);
  ComplexVector rhs = spaces_->gather_conforming(rhs_broken);
  ComplexVector u_tilde = conforming_lu_.solve(rhs);

  BrokenVector u(spaces_->scatter_conforming(u_tilde).coeffs + lifted.coeffs);
  MultiTracePrimal dirichlet = spaces_->apply_trace(u);
  MultiTraceDual neumann = lifting_->apply_transpose(apply_helmholtz(u));
  return {dirichlet, neumann};
}

ComplexMatrix CauchyProjector::dense() const {
  const int n = spaces_->trace_layout().total();
  if (n > densify_cap) throw Error("CauchyProjector::dense: multi-trace size exceeds cap");
  ComplexMatrix out(2 * n, 2 * n);
  MultiTracePrimal v = MultiTracePrimal::zero(n);
  MultiTraceDual p = MultiTraceDual::zero(n);
  for (int c = 0; c < 2 * n; ++c) {
    v.coeffs.setZero();
    p.coeffs.setZero();
    if (c < n)
      v.coeffs(c) = 1.0;
    else
      p.coeffs(c - n) = 1.0;
    auto [ud, un] = apply(v, p);
    out.col(c).head(n) = ud.coeffs;
    out.col(c).tail(n) = un.coeffs;
  }
  return out;
}

double compute_projector_norm(const CauchyProjector& projector, const ImpedanceOperator& t) {
  const int n = t.spaces().trace_layout().total();
  ComplexMatrix gram = ComplexMatrix::Zero(2 * n, 2 * n);
  gram.topLeftCorner(n, n) = t.dense_sym();
  gram.bottomRightCorner(n, n) = t.dense_sym_inverse();
  return max_singular_in_norms(projector.dense(), gram, gram);
}

double verify_factorization(const SkeletonSystem& system, const CauchyProjector& projector,
                            int samples, Rng& rng) {
  const ImpedanceOperator& t = system.impedance();
  const int n = system.spaces().trace_layout().total();
  LuFactorization dense_lu(system.dense());

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    MultiTraceDual f(rng.complex_vector(n));
    ComplexVector direct = dense_lu.solve(f.coeffs);

    // (i/2) T' P T Ts^-1 f  with T(v) = (v, -i T* v), T'(v, p) = p - i T(v)
    MultiTracePrimal half = t.solve_sym(f);
    MultiTraceDual paired(-i_unit * t.apply_adjoint(half).coeffs);
    auto [ud, un] = projector.apply(half, paired);
    ComplexVector factored = 0.5 * i_unit * (un.coeffs - i_unit * t.apply(ud).coeffs);

    const double denom = t.norm_ts_dual(MultiTraceDual(direct));
    const double diff = t.norm_ts_dual(MultiTraceDual(factored - direct));
    worst = std::max(worst, denom > 0.0 ? diff / denom : diff);
  }
  return worst;
}

std::vector<Complex> sample_field_of_values(const SkeletonSystem& system, int samples, Rng& rng) {
  const ImpedanceOperator& t = system.impedance();
  const int n = system.spaces().trace_layout().total();
  std::vector<Complex> values;
  values.reserve(samples);
  for (int s = 0; s < samples; ++s) {
    MultiTraceDual p(rng.complex_vector(n));
    const double norm = t.norm_ts_dual(p);
    if (norm == 0.0) throw Error("sample_field_of_values: zero sample rejected");
    p.coeffs /= norm;
    MultiTraceDual w = system.apply(p);
    MultiTracePrimal conj_dir = t.solve_sym(MultiTraceDual(p.coeffs.conjugate()));
    values.push_back((w.coeffs.transpose() * conj_dir.coeffs).value());
  }
  return values;
}

ConstantsReport compute_constants(const Mesh& mesh, const FemSystem& fem,
                                  const TraceSpaces& spaces, const ImpedanceOperator& t,
                                  const SkeletonSystem& system) {
  if (spaces.trace_layout().total() > densify_cap)
    throw Error("compute_constants: multi-trace space exceeds " + std::to_string(densify_cap) +
                " dofs; constants mode refuses this mesh");

  ConstantsReport report;
  HarmonicLifting lifting(fem, spaces);
  TraceBounds bounds = compute_trace_bounds(t, lifting);
  report.t_minus = bounds.t_minus;
  report.t_plus = bounds.t_plus;
  report.t_star = compute_skew_bound(t);
  report.alpha_h = compute_infsup_alpha(mesh, fem.medium);
  report.norm_a = compute_continuity(fem, spaces);
  report.beta_h = compute_beta(fem, t);

  CauchyProjector projector(fem, spaces, lifting);
  report.norm_p = compute_projector_norm(projector, t);

  ComplexMatrix ts_inv = t.dense_sym_inverse();
  report.gamma_exact = min_singular_in_norms(system.dense(), ts_inv, ts_inv);

  const double skew_term = 1.0 + (1.0 + report.t_star) * (1.0 + report.t_star);
  const double proj_term = report.t_plus * report.t_plus +
                           std::pow(2.0 * report.norm_a / report.t_minus, 2);
  report.gamma_bound_thm = 2.0 * report.alpha_h / (skew_term * proj_term);
  if (t.is_hermitian()) report.gamma_bound_hpd = 1.0 / report.norm_p;

  // Certified inequalities of the theory; failure means a broken build.
  const double proj_bound = proj_term / report.alpha_h;
  if (report.t_minus > report.t_plus + 1e-9)
    throw Error("constants invariant violated: t_minus > t_plus");
  if (report.norm_p > proj_bound + 1e-9)
    throw Error("constants invariant violated: ||P|| exceeds its bound");
  if (report.gamma_exact < report.gamma_bound_thm - 1e-9)
    throw Error("constants invariant violated: gamma below the explicit lower bound");
  if (report.gamma_bound_hpd && report.gamma_exact < *report.gamma_bound_hpd - 1e-9)
    throw Error("constants invariant violated: gamma below 1/||P||");
  return report;
}

}  // namespace helmdd
