#include <cmath>

#include "helmdd/runner.hpp"

// Randomized invariant suites behind verify mode. Each suite reports its
// worst observed residual against a fixed threshold; seeds are explicit so
// reruns are byte-stable.

namespace helmdd {

namespace {

const Complex i_unit(0.0, 1.0);

double rel(double defect, double scale) { return scale > 0.0 ? defect / scale : defect; }

}  // namespace

std::vector<VerifySuite> run_verify_suites(const Mesh& mesh, const TraceSpaces& spaces,
                                           const FemSystem& fem, const ImpedanceOperator& t,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<VerifySuite> suites;
  const auto add = [&](const char* name, double residual, double threshold) {
    suites.push_back({name, residual <= threshold, residual});
  };

  const int n_mt = spaces.trace_layout().total();
  const int n_vol = spaces.volume_layout().total();
  const int n_sk = spaces.skeleton_size();

  {  // bilinear pairing identities of B/B* and R/R*, and R*R = multiplicity
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      MultiTraceDual p(rng.complex_vector(n_mt));
      BrokenVector u(rng.complex_vector(n_vol));
      SkeletonVector w(rng.complex_vector(n_sk));

      Complex lhs = pair(BrokenVector(spaces.apply_trace_adjoint(p).coeffs), u);
      Complex rhs = pair(p, spaces.apply_trace(u));
      worst = std::max(worst, rel(std::abs(lhs - rhs), std::abs(rhs)));

      Complex lhs2 =
          (spaces.apply_restriction_adjoint(p).values.transpose() * w.values).value();
      Complex rhs2 = pair(p, spaces.apply_restriction(w));
      worst = std::max(worst, rel(std::abs(lhs2 - rhs2), std::abs(rhs2)));

      MultiTracePrimal rw = spaces.apply_restriction(w);
      SkeletonVector sums = spaces.apply_restriction_adjoint(MultiTraceDual(rw.coeffs));
      ComplexVector expected = spaces.multiplicity().cast<Complex>().cwiseProduct(w.values);
      worst = std::max(worst, rel((sums.values - expected).norm(), expected.norm()));
    }
    add("trace_pairing_identities", worst, 1e-12);
  }

  {  // project_onto_polar lands in Ker(R*) and fixes it pointwise
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      MultiTraceDual p(rng.complex_vector(n_mt));
      MultiTraceDual q = project_onto_polar(p, t);
      worst = std::max(worst, rel(spaces.apply_restriction_adjoint(q).values.norm(),
                                  p.coeffs.norm()));
      MultiTraceDual q2 = project_onto_polar(q, t);
      worst = std::max(worst, rel((q2.coeffs - q.coeffs).norm(), p.coeffs.norm()));
      // algebraic cancellation: p = T* R w projects to zero
      SkeletonVector w(rng.complex_vector(n_sk));
      MultiTraceDual trw = t.apply_adjoint(spaces.apply_restriction(w));
      worst = std::max(worst,
                       rel(project_onto_polar(trw, t).coeffs.norm(), trw.coeffs.norm()));
    }
    add("polar_projection", worst, 1e-11);
  }

  {  // direct sum V_h(Sigma) = X_h + T^-1(X_h^o)
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      MultiTracePrimal v(rng.complex_vector(n_mt));
      auto split = decompose_primal(v, t);
      worst = std::max(
          worst, rel((split.single_trace.coeffs + split.remainder.coeffs - v.coeffs).norm(),
                     v.coeffs.norm()));
      SkeletonVector leak = spaces.apply_restriction_adjoint(t.apply(split.remainder));
      worst = std::max(worst, rel(leak.values.norm(), t.apply(v).coeffs.norm()));
      auto again = decompose_primal(split.single_trace, t);
      worst = std::max(worst, rel(again.remainder.coeffs.norm(), v.coeffs.norm()));
    }
    add("primal_decomposition", worst, 1e-11);
  }

  {  // duality bound and the Ts / Ts^-1 norm interplay
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
      MultiTracePrimal v(rng.complex_vector(n_mt));
      MultiTraceDual p(rng.complex_vector(n_mt));
      const double bound = t.norm_ts(v) * t.norm_ts_dual(p);
      worst = std::max(worst, rel(std::max(0.0, std::abs(pair(p, v)) - bound), bound));
      worst = std::max(
          worst, rel(std::abs(t.norm_ts_dual(t.apply_sym(v)) - t.norm_ts(v)), t.norm_ts(v)));
      worst = std::max(worst, rel(std::abs(t.norm_ts(t.solve_sym(p)) - t.norm_ts_dual(p)),
                                  t.norm_ts_dual(p)));
    }
    add("duality_and_norms", worst, 1e-11);
  }

  {  // sign of the absorption term
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      BrokenVector u(rng.complex_vector(n_vol));
      worst = std::max(worst, absorption_term(fem, spaces, u) / u.coeffs.squaredNorm());
    }
    add("absorption_sign", worst, 1e-12);
  }

  {  // summing subdomain matrices reproduces the conforming matrix
    ComplexMatrix direct = assemble_conforming_helmholtz(mesh, fem.medium);
    ComplexMatrix summed = ComplexMatrix::Zero(direct.rows(), direct.cols());
    for (int j = 0; j < spaces.subdomain_count(); ++j) {
      const auto& dofs = spaces.volume_dofs(j);
      const ComplexMatrix& aj = fem.subdomains[j].helmholtz;
      for (int a = 0; a < aj.rows(); ++a)
        for (int b = 0; b < aj.cols(); ++b) summed(dofs[a], dofs[b]) += aj(a, b);
    }
    const double scale = direct.cwiseAbs().maxCoeff();
    add("conforming_consistency", (summed - direct).cwiseAbs().maxCoeff() / scale, 1e-12);
  }

  ExchangeOperator pi(t);
  ScatteringOperator s(fem, t);

  {  // Pi is a Ts^-1 isometry
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      MultiTraceDual p(rng.complex_vector(n_mt));
      const double before = t.norm_ts_dual(p);
      worst = std::max(worst, std::abs(t.norm_ts_dual(pi.apply(p)) - before) / before);
    }
    add("exchange_isometry", worst, 1e-10);
  }

  {  // Pi composed with Pi^-1
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      MultiTraceDual p(rng.complex_vector(n_mt));
      MultiTraceDual back = pi.apply(pi.apply_inverse(p));
      worst = std::max(worst, t.norm_ts_dual(back - p) / t.norm_ts_dual(p));
    }
    add("exchange_roundtrip", worst, 1e-10);
  }

  {  // scattering energy identity
    double worst = 0.0;
    for (int k = 0; k < 100; ++k)
      worst = std::max(worst,
                       s.energy_identity_residual(MultiTraceDual(rng.complex_vector(n_mt))));
    add("scattering_energy", worst, 1e-9);
  }

  {  // transmission characterization on members and perturbations
    double worst = 0.0;
    bool verdicts_ok = true;
    for (int k = 0; k < 20; ++k) {
      SkeletonVector w(rng.complex_vector(n_sk));
      MultiTracePrimal u = spaces.apply_restriction(w);
      MultiTraceDual p = project_onto_polar(MultiTraceDual(rng.complex_vector(n_mt)), t);
      worst = std::max(worst, transmission_residual(u, p, pi));
      verdicts_ok = verdicts_ok && check_transmission_characterization(u, p, pi);

      MultiTraceDual bump(rng.complex_vector(n_mt));
      bump.coeffs /= t.norm_ts_dual(bump);
      verdicts_ok =
          verdicts_ok && !check_transmission_characterization(u, p + bump, pi);
    }
    suites.push_back({"transmission_characterization", verdicts_ok && worst <= 1e-9, worst});
  }

  {  // Cauchy characterization on members and perturbations
    double worst = 0.0;
    bool verdicts_ok = true;
    for (int k = 0; k < 20; ++k) {
      CauchyPair member = make_cauchy_pair(s, MultiTraceDual(rng.complex_vector(n_mt)));
      worst = std::max(worst, cauchy_residual(member.dirichlet, member.neumann, s));
      verdicts_ok =
          verdicts_ok && check_cauchy_characterization(member.dirichlet, member.neumann, s);

      MultiTraceDual bump(rng.complex_vector(n_mt));
      bump.coeffs /= t.norm_ts_dual(bump);
      verdicts_ok = verdicts_ok &&
                    !check_cauchy_characterization(member.dirichlet, member.neumann + bump, s);
    }
    suites.push_back({"cauchy_characterization", verdicts_ok && worst <= 1e-9, worst});
  }

  {  // energy conservation on Cauchy data
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      CauchyPair member = make_cauchy_pair(s, MultiTraceDual(rng.complex_vector(n_mt)));
      const MultiTracePrimal& v = member.dirichlet;
      const MultiTraceDual& p = member.neumann;
      const double im_part = (v.coeffs.adjoint() * p.coeffs).value().imag();
      const double scale = std::max(1.0, t.norm_ts(v) * t.norm_ts_dual(p));
      worst = std::max(worst, im_part / scale);  // must be <= 0 up to roundoff

      const double left = std::pow(t.norm_ts(v), 2) + std::pow(t.norm_ts_dual(p), 2);
      MultiTraceDual plus(p.coeffs + i_unit * t.apply_sym(v).coeffs);
      MultiTraceDual minus(p.coeffs - i_unit * t.apply_sym(v).coeffs);
      const double mid = std::pow(t.norm_ts_dual(plus), 2) + 2.0 * std::abs(im_part);
      const double right = std::pow(t.norm_ts_dual(minus), 2) - 2.0 * std::abs(im_part);
      worst = std::max(worst, std::abs(left - mid) / left);
      worst = std::max(worst, std::abs(left - right) / left);
    }
    add("cauchy_energy", worst, 1e-9);
  }

  {  // local swap: involution and reflection of polar traces
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      MultiTraceDual p(rng.complex_vector(n_mt));
      MultiTraceDual twice = apply_local_swap(spaces, apply_local_swap(spaces, p));
      worst = std::max(worst, rel((twice.coeffs - p.coeffs).norm(), p.coeffs.norm()));
      MultiTraceDual q = project_onto_polar(p, t);
      MultiTraceDual swapped = apply_local_swap(spaces, q);
      worst = std::max(worst, rel((swapped.coeffs + q.coeffs).norm(), p.coeffs.norm()));
    }
    add("local_swap", worst, 1e-11);
  }

  {  // harmonic lifting: right inverse, minimality, norm identity
    HarmonicLifting lifting(fem, spaces);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      MultiTracePrimal v(rng.complex_vector(n_mt));
      BrokenVector lifted = lifting.apply(v);
      worst = std::max(
          worst, rel((spaces.apply_trace(lifted).coeffs - v.coeffs).norm(), v.coeffs.norm()));

      BrokenVector u(rng.complex_vector(n_vol));
      MultiTracePrimal bu = spaces.apply_trace(u);
      const double lifted_norm = lifting.lifting_norm(bu);
      double u_norm = 0.0;
      for (int j = 0; j < spaces.subdomain_count(); ++j) {
        auto uj = spaces.volume_layout().seg(u.coeffs, j);
        u_norm += (uj.adjoint() * (fem.subdomains[j].h1_gram * uj)).value().real();
      }
      u_norm = std::sqrt(u_norm);
      worst = std::max(worst, (lifted_norm - u_norm) / u_norm);

      BrokenVector direct = lifting.apply(bu);
      double direct_norm = 0.0;
      for (int j = 0; j < spaces.subdomain_count(); ++j) {
        auto dj = spaces.volume_layout().seg(direct.coeffs, j);
        direct_norm += (dj.adjoint() * (fem.subdomains[j].h1_gram * dj)).value().real();
      }
      worst = std::max(worst,
                       std::abs(std::sqrt(direct_norm) - lifting.lifting_norm(bu)) /
                           lifting.lifting_norm(bu));
    }
    add("harmonic_lifting", worst, 1e-11);
  }

  return suites;
}

}  // namespace helmdd
