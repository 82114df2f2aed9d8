#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helmdd/impedance.hpp"
#include "helmdd/rng.hpp"
#include "support.hpp"

using namespace helmdd;

namespace {

struct Lab {
  Mesh mesh;
  SubdomainTopology topo;
  std::unique_ptr<TraceSpaces> spaces;
  FemSystem fem;

  explicit Lab(Complex kappa, int cells = 4) : mesh(generate_structured_square(cells, 2.0)) {
    topo = extract_topology(mesh, testing::quadrant_partition(mesh));
    spaces = std::make_unique<TraceSpaces>(topo);
    fem = assemble_system(topo, MediumSpec{kappa, 1.0});
  }
};

const Complex experiment_kappa(2.0 * M_PI / 0.2, 1.0);

}  // namespace

TEST_CASE("catalog kinds map to the advertised matrices") {
  Lab lab(experiment_kappa);
  const double akappa = std::abs(experiment_kappa);

  ImpedanceOperator identity = build_impedance(ImpedanceSpec::identity(), *lab.spaces, lab.fem);
  for (int j = 0; j < 4; ++j) {
    CHECK(identity.block(j).isIdentity(1e-15));
    CHECK(identity.sym_block(j).isIdentity(1e-15));
  }

  Complex z = std::polar(1.0, M_PI / 4.0);
  ImpedanceOperator oo0 = build_impedance(ImpedanceSpec::scaled_mass(z), *lab.spaces, lab.fem);
  for (int j = 0; j < 4; ++j) {
    const ComplexMatrix& mass = lab.fem.subdomains[j].boundary_mass;
    CHECK((oo0.block(j) - z * mass).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((oo0.sym_block(j) - std::cos(M_PI / 4.0) * mass).cwiseAbs().maxCoeff() < 1e-14);
  }

  ImpedanceOperator second = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  for (int j = 0; j < 4; ++j) {
    ComplexMatrix expected = lab.fem.subdomains[j].boundary_stiffness / (2.0 * akappa) +
                             akappa * lab.fem.subdomains[j].boundary_mass;
    CHECK((second.block(j) - expected).cwiseAbs().maxCoeff() < 1e-12);
    // self-adjoint catalog entry: T coincides with Ts entrywise
    CHECK((second.block(j) - second.sym_block(j)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(second.is_hermitian());

  const double theta = M_PI / 10.0;
  ImpedanceOperator rotated =
      build_impedance(ImpedanceSpec::rotated_second_order(theta), *lab.spaces, lab.fem);
  for (int j = 0; j < 4; ++j) {
    ComplexMatrix expected = std::exp(Complex(0.0, -theta)) * second.block(j);
    CHECK((rotated.block(j) - expected).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(!rotated.is_hermitian());

  ImpedanceOperator scaled_ref = build_impedance(
      ImpedanceSpec::scaled_reference(Complex(2.0, 1.0), ReferenceKind::IdentityD), *lab.spaces,
      lab.fem);
  for (int j = 0; j < 4; ++j) {
    ComplexMatrix expected =
        Complex(2.0, 1.0) * ComplexMatrix::Identity(scaled_ref.block(j).rows(),
                                                    scaled_ref.block(j).cols());
    CHECK((scaled_ref.block(j) - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  std::vector<Complex> zs{Complex(1, 0), Complex(2, 1), Complex(3, -1), Complex(1, 2)};
  ImpedanceOperator per_sub =
      build_impedance(ImpedanceSpec::per_subdomain_scaled_mass(zs), *lab.spaces, lab.fem);
  for (int j = 0; j < 4; ++j)
    CHECK((per_sub.block(j) - zs[j] * lab.fem.subdomains[j].boundary_mass).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("spec validation rejects non-coercive parameters up front") {
  Lab lab(experiment_kappa);
  CHECK_THROWS_AS(build_impedance(ImpedanceSpec::scaled_mass(Complex(0.0, 1.0)), *lab.spaces,
                                  lab.fem),
                  Error);
  CHECK_THROWS_AS(build_impedance(ImpedanceSpec::scaled_mass(Complex(-1.0, 0.0)), *lab.spaces,
                                  lab.fem),
                  Error);
  CHECK_THROWS_AS(build_impedance(ImpedanceSpec::rotated_second_order(1.6), *lab.spaces, lab.fem),
                  Error);
  CHECK_THROWS_AS(build_impedance(ImpedanceSpec::per_subdomain_scaled_mass({Complex(1, 0)}),
                                  *lab.spaces, lab.fem),
                  Error);
}

TEST_CASE("coercivity verification reports the minimal Rayleigh quotient") {
  Lab lab(experiment_kappa);
  std::vector<ComplexMatrix> mass(4);
  for (int j = 0; j < 4; ++j) mass[j] = lab.fem.subdomains[j].boundary_mass;

  auto identity_blocks =
      assemble_impedance_blocks(ImpedanceSpec::identity(), lab.topo, lab.fem);
  CHECK(verify_coercivity(identity_blocks, mass).coercive);

  // z = i gives Ts = 0: not coercive, Rayleigh quotient zero
  auto imaginary_blocks =
      assemble_impedance_blocks(ImpedanceSpec::scaled_mass(Complex(0.0, 1.0)), lab.topo, lab.fem);
  auto report = verify_coercivity(imaginary_blocks, mass);
  CHECK(!report.coercive);
  CHECK(std::abs(report.min_rayleigh) < 1e-12);

  // choice 1 of the experiment: T_j = kappa M_j with Re kappa > 0
  auto choice1 = assemble_impedance_blocks(ImpedanceSpec::scaled_mass(experiment_kappa), lab.topo,
                                           lab.fem);
  auto c1 = verify_coercivity(choice1, mass);
  CHECK(c1.coercive);
  CHECK(c1.min_rayleigh == doctest::Approx(experiment_kappa.real()).epsilon(1e-10));

  std::vector<ComplexMatrix> negative(4);
  for (int j = 0; j < 4; ++j)
    negative[j] = -ComplexMatrix::Identity(mass[j].rows(), mass[j].cols());
  CHECK_THROWS_AS(build_impedance_from_blocks(std::move(negative), *lab.spaces), CoercivityError);
}

TEST_CASE("norms: pinned values and the duality bound") {
  Lab lab(experiment_kappa);
  ImpedanceOperator identity = build_impedance(ImpedanceSpec::identity(), *lab.spaces, lab.fem);
  const int n = lab.spaces->trace_layout().total();

  CHECK(identity.norm_ts(MultiTracePrimal::zero(n)) == 0.0);
  CHECK(identity.norm_ts_dual(MultiTraceDual::zero(n)) == 0.0);

  MultiTracePrimal unit = MultiTracePrimal::zero(n);
  unit.coeffs(3) = Complex(1, 0);
  CHECK(identity.norm_ts(unit) == doctest::Approx(1.0));

  ImpedanceOperator rotated =
      build_impedance(ImpedanceSpec::rotated_second_order(0.3), *lab.spaces, lab.fem);
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    MultiTracePrimal v(rng.complex_vector(n));
    MultiTraceDual p(rng.complex_vector(n));
    CHECK(std::abs(pair(p, v)) <= rotated.norm_ts(v) * rotated.norm_ts_dual(p) + 1e-12);
    // Ts as an isometry between the primal and dual norms
    const double lhs = rotated.norm_ts_dual(rotated.apply_sym(v));
    CHECK(std::abs(lhs - rotated.norm_ts(v)) <= 1e-11 * rotated.norm_ts(v));
    const double rhs = rotated.norm_ts(rotated.solve_sym(p));
    CHECK(std::abs(rhs - rotated.norm_ts_dual(p)) <= 1e-11 * rotated.norm_ts_dual(p));
  }
}

TEST_CASE("symmetric parts are Hermitian to machine precision") {
  Lab lab(experiment_kappa);
  for (const auto& spec :
       {ImpedanceSpec::identity(), ImpedanceSpec::scaled_mass(Complex(1.0, 2.0)),
        ImpedanceSpec::second_order(), ImpedanceSpec::rotated_second_order(-0.4)}) {
    ImpedanceOperator t = build_impedance(spec, *lab.spaces, lab.fem);
    ComplexMatrix ts = t.dense_sym();
    const double scale = ts.cwiseAbs().maxCoeff();
    CHECK((ts - ts.adjoint().eval()).cwiseAbs().maxCoeff() <= 1e-13 * scale);
  }
}

TEST_CASE("primal decomposition against the direct sum") {
  Lab lab(experiment_kappa);
  ImpedanceOperator t =
      build_impedance(ImpedanceSpec::scaled_mass(Complex(1.0, 0.8)), *lab.spaces, lab.fem);
  const TraceSpaces& sp = *lab.spaces;
  const int n = sp.trace_layout().total();
  Rng rng(22);

  // already single-trace: remainder vanishes
  SkeletonVector w(rng.complex_vector(sp.skeleton_size()));
  MultiTracePrimal rw = sp.apply_restriction(w);
  auto fixed = decompose_primal(rw, t);
  CHECK(fixed.remainder.coeffs.norm() <= 1e-11 * rw.coeffs.norm());

  // constructed remainder: v with T(v) polar decomposes as (0, v)
  MultiTraceDual polar = project_onto_polar(MultiTraceDual(rng.complex_vector(n)), t);
  // T^-1 applied through the blocks
  MultiTracePrimal remainder_only = MultiTracePrimal::zero(n);
  for (int j = 0; j < sp.subdomain_count(); ++j) {
    LuFactorization block_lu(t.block(j));
    sp.trace_layout().seg(remainder_only.coeffs, j) =
        block_lu.solve(sp.trace_layout().seg(polar.coeffs, j).eval());
  }
  auto pure = decompose_primal(remainder_only, t);
  CHECK(pure.single_trace.coeffs.norm() <= 1e-10 * remainder_only.coeffs.norm());

  // generic splits recombine exactly and are projector-stable
  for (int k = 0; k < 10; ++k) {
    MultiTracePrimal v(rng.complex_vector(n));
    auto split = decompose_primal(v, t);
    CHECK((split.single_trace.coeffs + split.remainder.coeffs - v.coeffs).norm() <=
          1e-14 * v.coeffs.norm());
    SkeletonVector leak = sp.apply_restriction_adjoint(t.apply(split.remainder));
    CHECK(leak.values.norm() <= 1e-11 * t.apply(v).coeffs.norm());
    auto again = decompose_primal(split.single_trace, t);
    CHECK(again.remainder.coeffs.norm() <= 1e-11 * v.coeffs.norm());
    CHECK((again.single_trace.coeffs - split.single_trace.coeffs).norm() <=
          1e-11 * v.coeffs.norm());
  }
}
