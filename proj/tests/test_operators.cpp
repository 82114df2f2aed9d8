#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "helmdd/constants.hpp"
#include "helmdd/operators.hpp"
#include "helmdd/rng.hpp"
#include "support.hpp"

using namespace helmdd;

namespace {

const Complex experiment_kappa(2.0 * M_PI / 0.2, 1.0);

struct Lab {
  Mesh mesh;
  SubdomainTopology topo;
  std::unique_ptr<TraceSpaces> spaces;
  FemSystem fem;

  Lab(Mesh m, const Partition& part, Complex kappa) : mesh(std::move(m)) {
    topo = extract_topology(mesh, part);
    spaces = std::make_unique<TraceSpaces>(topo);
    fem = assemble_system(topo, MediumSpec{kappa, 1.0});
  }
};

Lab quadrant_lab(Complex kappa, int cells = 4) {
  Mesh mesh = generate_structured_square(cells, 2.0);
  Partition part = testing::quadrant_partition(mesh);
  return Lab(std::move(mesh), part, kappa);
}

/// Hexagonal fan around the origin split into three subdomains; the center
/// vertex has multiplicity 3.
Lab fan_lab(Complex kappa) {
  std::ostringstream src;
  src << "$Vertices\n7\n0 0\n";
  for (int k = 0; k < 6; ++k)
    src << std::cos(k * M_PI / 3.0) << " " << std::sin(k * M_PI / 3.0) << "\n";
  src << "$Triangles\n6\n";
  for (int k = 0; k < 6; ++k) src << "0 " << (1 + k) << " " << (1 + (k + 1) % 6) << "\n";
  std::istringstream in(src.str());
  Mesh mesh = load_mesh(in, MeshFormat::Native);
  Partition part;
  part.subdomain_count = 3;
  part.subdomain_of_triangle = {0, 0, 1, 1, 2, 2};
  return Lab(std::move(mesh), part, kappa);
}

}  // namespace

TEST_CASE("single subdomain with self-adjoint impedance: the exchange is the identity") {
  Mesh mesh = generate_structured_square(3, 2.0);
  Lab lab(std::move(mesh), testing::single_partition(mesh), experiment_kappa);
  ImpedanceOperator t = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  ExchangeOperator pi(t);
  Rng rng(31);
  MultiTraceDual p(rng.complex_vector(lab.spaces->trace_layout().total()));
  CHECK((pi.apply(p).coeffs - p.coeffs).norm() <= 1e-11 * p.coeffs.norm());
}

TEST_CASE("exchange flips polar traces and is a Ts^-1 isometry") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator t =
      build_impedance(ImpedanceSpec::rotated_second_order(M_PI / 10.0), *lab.spaces, lab.fem);
  ExchangeOperator pi(t);
  Rng rng(32);
  const int n = lab.spaces->trace_layout().total();

  for (int k = 0; k < 10; ++k) {
    MultiTraceDual polar = project_onto_polar(MultiTraceDual(rng.complex_vector(n)), t);
    CHECK((pi.apply(polar).coeffs + polar.coeffs).norm() <= 1e-10 * polar.coeffs.norm());
  }
  for (int k = 0; k < 100; ++k) {
    MultiTraceDual p(rng.complex_vector(n));
    const double before = t.norm_ts_dual(p);
    CHECK(std::abs(t.norm_ts_dual(pi.apply(p)) - before) <= 1e-10 * before);
  }
}

TEST_CASE("exchange inverse: self-adjoint coincidence and round trips") {
  Lab lab = quadrant_lab(experiment_kappa);
  Rng rng(33);
  const int n = lab.spaces->trace_layout().total();

  ImpedanceOperator hpd = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  ExchangeOperator pi_hpd(hpd);
  for (int k = 0; k < 10; ++k) {
    MultiTraceDual p(rng.complex_vector(n));
    CHECK((pi_hpd.apply_inverse(p).coeffs - pi_hpd.apply(p).coeffs).norm() <=
          1e-10 * p.coeffs.norm());
  }

  ImpedanceOperator oblique = build_impedance(
      ImpedanceSpec::scaled_reference(std::polar(1.0, M_PI / 4.0), ReferenceKind::IdentityD),
      *lab.spaces, lab.fem);
  ExchangeOperator pi(oblique);
  double distinct = 0.0;
  for (int k = 0; k < 10; ++k) {
    MultiTraceDual p(rng.complex_vector(n));
    CHECK((pi.apply(pi.apply_inverse(p)).coeffs - p.coeffs).norm() <= 1e-10 * p.coeffs.norm());
    CHECK((pi.apply_inverse(pi.apply(p)).coeffs - p.coeffs).norm() <= 1e-10 * p.coeffs.norm());
    distinct = std::max(distinct,
                        (pi.apply(p).coeffs - pi.apply_inverse(p).coeffs).norm() / p.coeffs.norm());
  }
  CHECK(distinct > 1e-3);  // genuinely non-involutive
}

TEST_CASE("local swap: hand-computed values on the split square") {
  Mesh mesh = testing::two_triangle_square();
  std::istringstream labels("0\n1\n");
  Partition part = load_partition(labels, mesh);
  Lab lab(std::move(mesh), part, Complex(1.0, 0.5));
  const TraceSpaces& sp = *lab.spaces;

  MultiTraceDual p = MultiTraceDual::zero(6);
  p.coeffs << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0), Complex(5, 0),
      Complex(6, 0);
  MultiTraceDual swapped = apply_local_swap(sp, p);
  ComplexVector expected(6);
  expected << Complex(4, 0), Complex(2, 0), Complex(5, 0), Complex(1, 0), Complex(3, 0),
      Complex(6, 0);
  CHECK((swapped.coeffs - expected).norm() == 0.0);

  // multiplicity-1 dofs are untouched: -p + 2p = p
  CHECK(swapped.coeffs(1) == p.coeffs(1));
  CHECK(swapped.coeffs(5) == p.coeffs(5));
}

TEST_CASE("local swap: multiplicity-3 cross-point reverses the value cycle") {
  Lab lab = fan_lab(Complex(1.0, 0.2));
  const TraceSpaces& sp = *lab.spaces;
  // the center vertex 0 is the first boundary dof of each subdomain
  for (int j = 0; j < 3; ++j) REQUIRE(sp.boundary_dofs(j)[0] == 0);

  MultiTraceDual p = MultiTraceDual::zero(sp.trace_layout().total());
  sp.trace_layout().seg(p.coeffs, 0)(0) = Complex(3, 0);
  sp.trace_layout().seg(p.coeffs, 1)(0) = Complex(6, 0);
  sp.trace_layout().seg(p.coeffs, 2)(0) = Complex(9, 0);
  MultiTraceDual swapped = apply_local_swap(sp, p);
  CHECK(sp.trace_layout().seg(swapped.coeffs, 0)(0) == Complex(9, 0));
  CHECK(sp.trace_layout().seg(swapped.coeffs, 1)(0) == Complex(6, 0));
  CHECK(sp.trace_layout().seg(swapped.coeffs, 2)(0) == Complex(3, 0));
}

TEST_CASE("local swap is an involution and equals its matrix form") {
  Lab lab = quadrant_lab(experiment_kappa);
  const TraceSpaces& sp = *lab.spaces;
  Rng rng(34);
  const int n = sp.trace_layout().total();

  ComplexMatrix swap = local_swap_matrix(sp);
  CHECK((swap * swap - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-12);
  for (int k = 0; k < 10; ++k) {
    MultiTraceDual p(rng.complex_vector(n));
    CHECK((apply_local_swap(sp, p).coeffs - swap * p.coeffs).norm() <= 1e-13 * p.coeffs.norm());
  }
}

TEST_CASE("locality criterion: diagonal impedances") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator identity = build_impedance(ImpedanceSpec::identity(), *lab.spaces, lab.fem);
  LocalityReport report = check_locality_criterion(identity);
  CHECK(report.trace_identity);
  CHECK(report.commutation);
  REQUIRE(report.exchange_match.has_value());
  CHECK(*report.exchange_match <= 1e-11);

  // z D with z off the real axis: local but not the plain swap
  const Complex z = 2.0 * std::polar(1.0, M_PI / 4.0);
  ImpedanceOperator scaled = build_impedance(
      ImpedanceSpec::scaled_reference(z, ReferenceKind::IdentityD), *lab.spaces, lab.fem);
  LocalityReport scaled_report = check_locality_criterion(scaled);
  CHECK(!scaled_report.trace_identity);

  ComplexMatrix swap = local_swap_matrix(*lab.spaces);
  const int n = swap.rows();
  ComplexMatrix p_loc = 0.5 * (ComplexMatrix::Identity(n, n) + swap);
  Complex phase = (z / std::abs(z)) * (z / std::abs(z));
  ComplexMatrix predicted = phase * p_loc - (ComplexMatrix::Identity(n, n) - p_loc);
  CHECK((ExchangeOperator(scaled).dense() - predicted).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("locality criterion fails for second-order impedance across cross-points") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator second = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  LocalityReport report = check_locality_criterion(second);
  CHECK(!report.trace_identity);
  CHECK(!report.commutation);
}

TEST_CASE("Robin factorizations: small pinned case and the experiment mesh") {
  // one triangle, kappa = 1, T = Id on its boundary
  std::istringstream in("$Vertices\n3\n0 0\n1 0\n0 1\n$Triangles\n1\n0 1 2\n");
  Mesh tri = load_mesh(in, MeshFormat::Native);
  Lab small(std::move(tri), testing::single_partition(tri), Complex(1.0, 0.0));
  ImpedanceOperator t_small =
      build_impedance(ImpedanceSpec::identity(), *small.spaces, small.fem);
  RobinFactorization robin_small(small.fem, t_small);
  Rng rng(35);
  BrokenVector rhs_small(rng.complex_vector(3));
  BrokenVector x = robin_small.solve(rhs_small);
  ComplexMatrix dense = robin_dense(small.fem, t_small);
  CHECK((dense * x.coeffs - rhs_small.coeffs).norm() <= 1e-10 * rhs_small.coeffs.norm());

  Lab lab = quadrant_lab(experiment_kappa, 6);
  ImpedanceOperator t = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  RobinFactorization robin(lab.fem, t);
  BrokenVector rhs(rng.complex_vector(lab.spaces->volume_layout().total()));
  BrokenVector u = robin.solve(rhs);
  CHECK((robin_dense(lab.fem, t) * u.coeffs - rhs.coeffs).norm() <= 1e-10 * rhs.coeffs.norm());
}

TEST_CASE("scattering: zero input, contraction, and the energy identity") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator t = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  ScatteringOperator s(lab.fem, t);
  Rng rng(36);
  const int n = lab.spaces->trace_layout().total();

  CHECK(s.apply(MultiTraceDual::zero(n)).coeffs.norm() == 0.0);

  for (int k = 0; k < 50; ++k) {
    MultiTraceDual p(rng.complex_vector(n));
    CHECK(s.energy_identity_residual(p) <= 1e-9);
    // absorption makes S a strict contraction here
    CHECK(t.norm_ts_dual(s.apply(p)) < t.norm_ts_dual(p));
  }
}

TEST_CASE("scattering conserves energy for a real wave number") {
  Lab lab = quadrant_lab(Complex(2.0 * M_PI / 0.5, 0.0));
  ImpedanceOperator t = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  ScatteringOperator s(lab.fem, t);
  Rng rng(37);
  const int n = lab.spaces->trace_layout().total();
  for (int k = 0; k < 50; ++k) {
    MultiTraceDual p(rng.complex_vector(n));
    const double before = t.norm_ts_dual(p);
    CHECK(std::abs(t.norm_ts_dual(s.apply(p)) - before) <= 1e-9 * before);
  }
}

TEST_CASE("transmission characterization: members, zero, and broken interfaces") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator t =
      build_impedance(ImpedanceSpec::rotated_second_order(M_PI / 10.0), *lab.spaces, lab.fem);
  ExchangeOperator pi(t);
  const TraceSpaces& sp = *lab.spaces;
  Rng rng(38);
  const int n = sp.trace_layout().total();

  CHECK(check_transmission_characterization(MultiTracePrimal::zero(n), MultiTraceDual::zero(n),
                                            pi));

  for (int k = 0; k < 20; ++k) {
    MultiTracePrimal u = sp.apply_restriction(SkeletonVector(rng.complex_vector(sp.skeleton_size())));
    MultiTraceDual p = project_onto_polar(MultiTraceDual(rng.complex_vector(n)), t);
    CHECK(check_transmission_characterization(u, p, pi));

    // mismatch one branch of a shared dof
    MultiTracePrimal broken = u;
    int shared = -1;
    for (int i = 0; i < static_cast<int>(sp.boundary_to_skeleton(0).size()); ++i)
      if (sp.multiplicity()(sp.boundary_to_skeleton(0)[i]) >= 2.0) shared = i;
    REQUIRE(shared >= 0);
    broken.coeffs(sp.trace_layout().offsets[0] + shared) += Complex(1.0, 0.0);
    CHECK(!check_transmission_characterization(broken, p, pi));
  }
}

TEST_CASE("Cauchy characterization: members, zero, perturbations") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator t =
      build_impedance(ImpedanceSpec::scaled_mass(Complex(1.0, 0.4)), *lab.spaces, lab.fem);
  ScatteringOperator s(lab.fem, t);
  Rng rng(39);
  const int n = lab.spaces->trace_layout().total();

  CHECK(check_cauchy_characterization(MultiTracePrimal::zero(n), MultiTraceDual::zero(n), s));

  for (int k = 0; k < 20; ++k) {
    CauchyPair member = make_cauchy_pair(s, MultiTraceDual(rng.complex_vector(n)));
    CHECK(check_cauchy_characterization(member.dirichlet, member.neumann, s));

    MultiTraceDual bump(rng.complex_vector(n));
    bump.coeffs /= t.norm_ts_dual(bump);
    CHECK(!check_cauchy_characterization(member.dirichlet, member.neumann + bump, s));
  }
}

TEST_CASE("self-adjoint impedance: orthogonal-exchange matrix identities") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator t = build_impedance(ImpedanceSpec::second_order(), *lab.spaces, lab.fem);
  ExchangeOperator exchange(t);
  const int n = lab.spaces->trace_layout().total();

  ComplexMatrix pi = exchange.dense();
  ComplexMatrix id = ComplexMatrix::Identity(n, n);
  CHECK((pi * pi - id).cwiseAbs().maxCoeff() <= 1e-10);

  ComplexMatrix r = lab.spaces->restriction_matrix();
  CHECK((pi.adjoint() * r - r).cwiseAbs().maxCoeff() <= 1e-10);

  ComplexMatrix reflect = 0.5 * (id - pi);   // projection onto the polar space
  ComplexMatrix retain = 0.5 * (id + pi.adjoint());  // projection onto single traces
  CHECK((reflect * reflect - reflect).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((retain * retain - retain).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("roots of the local swap: z on rational angles") {
  Lab lab = quadrant_lab(experiment_kappa);
  const int n = lab.spaces->trace_layout().total();
  ComplexMatrix swap = local_swap_matrix(*lab.spaces);

  // z = |z| exp(i pi / 5): the fifth power of the exchange is the swap
  ImpedanceOperator fifth = build_impedance(
      ImpedanceSpec::scaled_reference(3.0 * std::polar(1.0, M_PI / 5.0), ReferenceKind::IdentityD),
      *lab.spaces, lab.fem);
  ComplexMatrix pi5 = ExchangeOperator(fifth).dense();
  ComplexMatrix power = ComplexMatrix::Identity(n, n);
  for (int k = 0; k < 5; ++k) power = pi5 * power;
  CHECK((power - swap).cwiseAbs().maxCoeff() <= 1e-10);

  // z = exp(i pi / 4): the square of the exchange is minus the swap
  ImpedanceOperator quarter = build_impedance(
      ImpedanceSpec::scaled_reference(std::polar(1.0, M_PI / 4.0), ReferenceKind::IdentityD),
      *lab.spaces, lab.fem);
  ComplexMatrix pi4 = ExchangeOperator(quarter).dense();
  CHECK((pi4 * pi4 + swap).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("energy conservation identities on Cauchy data") {
  Lab lab = quadrant_lab(experiment_kappa);
  ImpedanceOperator t =
      build_impedance(ImpedanceSpec::rotated_second_order(-0.2), *lab.spaces, lab.fem);
  ScatteringOperator s(lab.fem, t);
  Rng rng(40);
  const int n = lab.spaces->trace_layout().total();
  const Complex i_unit(0, 1);

  for (int k = 0; k < 25; ++k) {
    CauchyPair member = make_cauchy_pair(s, MultiTraceDual(rng.complex_vector(n)));
    const MultiTracePrimal& v = member.dirichlet;
    const MultiTraceDual& p = member.neumann;

    const double im_part = (v.coeffs.adjoint() * p.coeffs).value().imag();
    CHECK(im_part <= 1e-11 * std::max(1.0, t.norm_ts(v) * t.norm_ts_dual(p)));

    const double left = std::pow(t.norm_ts(v), 2) + std::pow(t.norm_ts_dual(p), 2);
    MultiTraceDual plus(p.coeffs + i_unit * t.apply_sym(v).coeffs);
    MultiTraceDual minus(p.coeffs - i_unit * t.apply_sym(v).coeffs);
    CHECK(std::abs(left - (std::pow(t.norm_ts_dual(plus), 2) + 2.0 * std::abs(im_part))) <=
          1e-9 * left);
    CHECK(std::abs(left - (std::pow(t.norm_ts_dual(minus), 2) - 2.0 * std::abs(im_part))) <=
          1e-9 * left);
  }
}

TEST_CASE("operator dump format") {
  ComplexMatrix m(1, 2);
  m << Complex(1.5, -2.0), Complex(0.0, 3.25);
  std::ostringstream out;
  write_dense_operator(out, m);
  CHECK(out.str() == "0 0 1.5 -2\n0 1 0 3.25\n");
}
