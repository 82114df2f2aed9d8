#include "helmdd/solver.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace helmdd {

namespace {

const Complex i_unit(0.0, 1.0);

void format_line(std::ostream& out, const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  out << buf;
}

}  // namespace

void SolveConfig::validate() const {
  if (!(relax > 0.0 && relax <= 1.0)) throw ConfigError("solver: relax must lie in (0, 1]");
  if (!(tol > 0.0)) throw ConfigError("solver: tol must be positive");
  if (maxit < 0) throw ConfigError("solver: maxit must be nonnegative");
  if (restart < 1) throw ConfigError("solver: restart must be >= 1");
}

MultiTraceDual SkeletonSystem::apply(const MultiTraceDual& q) const {
  return MultiTraceDual(q.coeffs + pi_->apply(s_->apply(q)).coeffs);
}

MultiTraceDual SkeletonSystem::compute_rhs(const BrokenVector& f) const {
  const TraceSpaces& sp = spaces();
  BrokenVector uf = s_->robin().solve(f);
  MultiTraceDual forced = impedance().apply_sym(sp.apply_trace(uf));
  return MultiTraceDual(-2.0 * i_unit * pi_->apply(forced).coeffs);
}

ComplexMatrix SkeletonSystem::dense() const {
  const int n = spaces().trace_layout().total();
  if (n > densify_cap)
    throw Error("SkeletonSystem::dense: multi-trace size exceeds densify cap");
  ComplexMatrix out(n, n);
  MultiTraceDual e = MultiTraceDual::zero(n);
  for (int c = 0; c < n; ++c) {
    e.coeffs.setZero();
    e.coeffs(c) = 1.0;
    out.col(c) = apply(e).coeffs;
  }
  return out;
}

SolveResult richardson_solve(const SkeletonSystem& system, const MultiTraceDual& g,
                             const SolveConfig& config) {
  config.validate();
  const ImpedanceOperator& t = system.impedance();
  SolveResult result;
  result.solution = MultiTraceDual::zero(g.coeffs.size());

  const double norm_g = t.norm_ts_dual(g);
  if (norm_g == 0.0) {
    result.history.converged = true;
    result.history.residuals.emplace_back(0, 0.0);
    return result;
  }

  MultiTraceDual q = MultiTraceDual::zero(g.coeffs.size());
  for (int n = 0; n <= config.maxit; ++n) {
    MultiTraceDual r = g - system.apply(q);
    const double res = t.norm_ts_dual(r) / norm_g;
    result.history.residuals.emplace_back(n, res);
    if (config.record_iterates) result.history.iterates.push_back(q.coeffs);
    if (res < config.tol) {
      result.history.converged = true;
      result.history.iterations = n;
      result.solution = q;
      return result;
    }
    if (n < config.maxit) q += Complex(config.relax) * r;
  }
  // the returned iterate is the one whose residual was recorded last
  result.history.converged = false;
  result.history.iterations = config.maxit;
  result.solution = q;
  return result;
}

SolveResult gmres_solve(const SkeletonSystem& system, const MultiTraceDual& g,
                        const SolveConfig& config) {
  config.validate();
  const ImpedanceOperator& t = system.impedance();
  const Eigen::Index n = g.coeffs.size();

  SolveResult result;
  result.solution = MultiTraceDual::zero(n);

  const double norm_g = t.norm_ts_dual(g);
  if (norm_g == 0.0) {
    result.history.converged = true;
    result.history.residuals.emplace_back(0, 0.0);
    return result;
  }

  auto m_dot = [&](const ComplexVector& ts_inv_x, const ComplexVector& y) -> Complex {
    return (ts_inv_x.adjoint() * y).value();  // <y, x>_{Ts^-1}
  };

  ComplexVector q = ComplexVector::Zero(n);
  int iter = 0;
  result.history.residuals.emplace_back(0, 1.0);
  if (config.record_iterates) result.history.iterates.push_back(q);

  bool stagnated = false;
  while (iter < config.maxit) {
    MultiTraceDual r(g.coeffs - system.apply(MultiTraceDual(q)).coeffs);
    const double beta = t.norm_ts_dual(r);
    if (beta / norm_g < config.tol) break;

    const int m = std::min(config.restart, config.maxit - iter);
    std::vector<ComplexVector> basis, ts_inv_basis;
    basis.push_back(r.coeffs / beta);
    ts_inv_basis.push_back(t.solve_sym(MultiTraceDual(basis[0])).coeffs);

    ComplexMatrix hess = ComplexMatrix::Zero(m + 1, m);
    ComplexVector latest = q;
    bool cycle_converged = false;
    int k = 0;
    for (; k < m && iter < config.maxit; ++k) {
      ++iter;
      ComplexVector w = system.apply(MultiTraceDual(basis[k])).coeffs;
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = m_dot(ts_inv_basis[i], w);
        w -= hess(i, k) * basis[i];
      }
      hess(k + 1, k) = t.norm_ts_dual(MultiTraceDual(w));

      // assemble the current iterate and record the true residual
      ComplexVector rhs = ComplexVector::Zero(k + 2);
      rhs(0) = beta;
      ComplexVector y =
          hess.topLeftCorner(k + 2, k + 1).colPivHouseholderQr().solve(rhs);
      ComplexVector candidate = q;
      for (int i = 0; i <= k; ++i) candidate += y(i) * basis[i];
      MultiTraceDual true_res(g.coeffs - system.apply(MultiTraceDual(candidate)).coeffs);
      const double res = t.norm_ts_dual(true_res) / norm_g;
      result.history.residuals.emplace_back(iter, res);
      if (config.record_iterates) result.history.iterates.push_back(candidate);

      latest = candidate;
      if (res < config.tol) {
        cycle_converged = true;
        break;
      }
      if (hess(k + 1, k).real() <= 1e-300) break;  // happy breakdown without convergence
      basis.push_back(w / hess(k + 1, k));
      ts_inv_basis.push_back(t.solve_sym(MultiTraceDual(basis.back())).coeffs);
    }
    q = latest;  // restart point, also the returned iterate on exhaustion
    if (cycle_converged) {
      result.history.converged = true;
      result.history.iterations = iter;
      result.solution = MultiTraceDual(q);
      return result;
    }
    if (k == 0) {
      stagnated = true;
      break;
    }
  }
  result.history.converged = false;
  result.history.iterations = iter;
  result.solution = MultiTraceDual(q);
  if (stagnated) throw Error("gmres_solve: stagnation, no progress possible");
  return result;
}

SolveResult solve(const SkeletonSystem& system, const MultiTraceDual& g,
                  const SolveConfig& config) {
  return config.method == SolveConfig::Method::Richardson ? richardson_solve(system, g, config)
                                                          : gmres_solve(system, g, config);
}

Reconstruction reconstruct(const SkeletonSystem& system, const MultiTraceDual& q,
                           const BrokenVector& f) {
  const TraceSpaces& sp = system.spaces();
  BrokenVector rhs(sp.apply_trace_adjoint(q).coeffs + f.coeffs);
  Reconstruction rec;
  rec.volume = system.scattering().robin().solve(rhs);
  MultiTraceDual impeded = system.impedance().apply(sp.apply_trace(rec.volume));
  rec.neumann = MultiTraceDual(q.coeffs + i_unit * impeded.coeffs);
  return rec;
}

ComplexVector monolithic_solve(const Mesh& mesh, const MediumSpec& medium,
                               const SourceSpec& source) {
  ComplexMatrix a = assemble_conforming_helmholtz(mesh, medium);
  ComplexVector rhs = assemble_conforming_load(mesh, medium, source);
  try {
    LuFactorization lu(std::move(a));
    return lu.solve(rhs);
  } catch (const SingularMatrixError& e) {
    throw Error(std::string("monolithic_solve: conforming matrix is singular, "
                            "discrete well-posedness fails: ") +
                e.what());
  }
}

GlueResult glue(const TraceSpaces& spaces, const BrokenVector& u) {
  const auto& layout = spaces.volume_layout();
  if (u.coeffs.size() != layout.total()) throw DimensionError("glue: broken vector size mismatch");

  const int nv = spaces.conforming_size();
  ComplexVector sum = ComplexVector::Zero(nv);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(nv);
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    auto block = layout.seg(u.coeffs, j);
    const auto& dofs = spaces.volume_dofs(j);
    for (int i = 0; i < static_cast<int>(dofs.size()); ++i) {
      sum(dofs[i]) += block(i);
      count(dofs[i]) += 1.0;
    }
  }

  GlueResult out;
  out.conforming = ComplexVector::Zero(nv);
  for (int v = 0; v < nv; ++v)
    if (count(v) > 0.0) out.conforming(v) = sum(v) / count(v);

  std::vector<std::vector<Complex>> shared(nv);
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    auto block = layout.seg(u.coeffs, j);
    const auto& dofs = spaces.volume_dofs(j);
    for (int i = 0; i < static_cast<int>(dofs.size()); ++i)
      if (count(dofs[i]) > 1.0) shared[dofs[i]].push_back(block(i));
  }
  for (const auto& values : shared)
    for (std::size_t a = 0; a + 1 < values.size(); ++a)
      for (std::size_t b = a + 1; b < values.size(); ++b)
        out.max_jump = std::max(out.max_jump, std::abs(values[a] - values[b]));
  return out;
}

double relative_h1_error(const FemSystem& fem, const TraceSpaces& spaces, const BrokenVector& u,
                         const ComplexVector& ref_conforming) {
  BrokenVector ref = spaces.scatter_conforming(ref_conforming);
  const auto& layout = spaces.volume_layout();
  double err_sq = 0.0, ref_sq = 0.0;
  for (int j = 0; j < spaces.subdomain_count(); ++j) {
    ComplexVector diff = layout.seg(u.coeffs, j) - layout.seg(ref.coeffs, j);
    auto rj = layout.seg(ref.coeffs, j);
    err_sq += (diff.adjoint() * (fem.subdomains[j].h1_gram * diff)).value().real();
    ref_sq += (rj.adjoint() * (fem.subdomains[j].h1_gram * rj)).value().real();
  }
  if (ref_sq == 0.0) return std::sqrt(err_sq);
  return std::sqrt(err_sq / ref_sq);
}

void write_history_csv(std::ostream& out, const ConvergenceHistory& history) {
  out << "iter,res\n";
  for (const auto& [iter, res] : history.residuals) {
    out << iter << ",";
    format_line(out, "%.17g\n", res);
  }
}

void write_solution_csv(std::ostream& out, const ComplexVector& u) {
  out << "vertex_index,re,im\n";
  char buf[96];
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", static_cast<long>(i), u(i).real(),
                  u(i).imag());
    out << buf;
  }
}

void write_solution_vtk(std::ostream& out, const Mesh& mesh, const ComplexVector& u) {
  if (u.size() != mesh.vertex_count())
    throw DimensionError("write_solution_vtk: vector size does not match vertex count");
  char buf[120];
  out << "# vtk DataFile Version 3.0\n";
  out << "helmdd solution\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
    out << buf;
  }
  out << "CELLS " << mesh.triangle_count() << " " << 4 * mesh.triangle_count() << "\n";
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.triangle_count() << "\n";
  for (int t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.vertex_count() << "\n";
  out << "SCALARS re double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < u.size(); ++i) format_line(out, "%.17g\n", u(i).real());
  out << "SCALARS im double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index i = 0; i < u.size(); ++i) format_line(out, "%.17g\n", u(i).imag());
}

}  // namespace helmdd
