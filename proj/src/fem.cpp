#include "helmdd/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace helmdd {

namespace {

using Matrix3cd = Eigen::Matrix3cd;
using Matrix3d = Eigen::Matrix3d;

// Exact P1 element matrices on a straight triangle.
Matrix3d element_stiffness(const Point& a, const Point& b, const Point& c) {
  const double two_area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
  const double area = 0.5 * std::abs(two_area);
  // gradients of the barycentric functions
  const double gx[3] = {(b.y - c.y), (c.y - a.y), (a.y - b.y)};
  const double gy[3] = {(c.x - b.x), (a.x - c.x), (b.x - a.x)};
  Matrix3d k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = (gx[i] * gx[j] + gy[i] * gy[j]) / (4.0 * area);
  return k;
}

Matrix3d element_mass(double area) {
  Matrix3d m;
  m << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  return (area / 12.0) * m;
}

struct LocalIndex {
  std::map<int, int> map;
  explicit LocalIndex(const std::vector<int>& dofs) {
    for (int i = 0; i < static_cast<int>(dofs.size()); ++i) map[dofs[i]] = i;
  }
  int operator()(int global) const { return map.at(global); }
};

void check_subdomain(const SubdomainTopology& topo, int j, const char* who) {
  if (j < 0 || j >= topo.subdomain_count())
    throw DimensionError(std::string(who) + ": subdomain index out of range");
}

}  // namespace

double MediumSpec::kappa_star() const { return std::max(1.0, std::abs(kappa)); }

void MediumSpec::validate() const {
  if (kappa.real() < 0.0 || kappa.imag() < 0.0)
    throw Error("MediumSpec: kappa must have nonnegative real and imaginary parts");
  if (!(mu > 0.0)) throw Error("MediumSpec: mu must be positive");
}

ComplexMatrix assemble_subdomain_operator(const SubdomainTopology& topo, int j,
                                          const MediumSpec& medium) {
  check_subdomain(topo, j, "assemble_subdomain_operator");
  medium.validate();
  const Mesh& mesh = *topo.mesh;
  const auto& sub = topo.subdomains[j];
  LocalIndex local(sub.vertices);

  const Complex kappa2 = medium.kappa * medium.kappa;
  ComplexMatrix a = ComplexMatrix::Zero(sub.vertices.size(), sub.vertices.size());
  for (int t : sub.triangles) {
    const auto& tri = mesh.triangles[t];
    const double area = std::abs(mesh.triangle_area(t));
    if (area <= 1e-14) throw Error("assemble_subdomain_operator: degenerate triangle");
    Matrix3d k = element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    Matrix3d m = element_mass(area);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        a(local(tri[r]), local(tri[c])) += medium.mu * k(r, c) - kappa2 * m(r, c);
  }
  return a;
}

ComplexMatrix assemble_h1_gram(const SubdomainTopology& topo, int j, double kappa_star) {
  check_subdomain(topo, j, "assemble_h1_gram");
  if (kappa_star < 1.0) throw Error("assemble_h1_gram: kappa_star must be >= 1");
  const Mesh& mesh = *topo.mesh;
  const auto& sub = topo.subdomains[j];
  LocalIndex local(sub.vertices);

  ComplexMatrix n = ComplexMatrix::Zero(sub.vertices.size(), sub.vertices.size());
  for (int t : sub.triangles) {
    const auto& tri = mesh.triangles[t];
    const double area = std::abs(mesh.triangle_area(t));
    Matrix3d k = element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    Matrix3d m = element_mass(area);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        n(local(tri[r]), local(tri[c])) += k(r, c) + kappa_star * kappa_star * m(r, c);
  }
  return n;
}

ComplexMatrix assemble_boundary_mass(const SubdomainTopology& topo, int j) {
  check_subdomain(topo, j, "assemble_boundary_mass");
  const Mesh& mesh = *topo.mesh;
  const auto& sub = topo.subdomains[j];
  if (sub.boundary_edges.empty()) throw Error("assemble_boundary_mass: empty subdomain boundary");
  LocalIndex local(sub.boundary_dofs);

  ComplexMatrix m = ComplexMatrix::Zero(sub.boundary_dofs.size(), sub.boundary_dofs.size());
  for (const auto& edge : sub.boundary_edges) {
    const Point& pa = mesh.vertices[edge[0]];
    const Point& pb = mesh.vertices[edge[1]];
    const double h = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const int ia = local(edge[0]), ib = local(edge[1]);
    m(ia, ia) += h / 3.0;
    m(ib, ib) += h / 3.0;
    m(ia, ib) += h / 6.0;
    m(ib, ia) += h / 6.0;
  }
  return m;
}

ComplexMatrix assemble_boundary_tangential_stiffness(const SubdomainTopology& topo, int j) {
  check_subdomain(topo, j, "assemble_boundary_tangential_stiffness");
  const Mesh& mesh = *topo.mesh;
  const auto& sub = topo.subdomains[j];
  if (sub.boundary_edges.empty())
    throw Error("assemble_boundary_tangential_stiffness: empty subdomain boundary");
  LocalIndex local(sub.boundary_dofs);

  ComplexMatrix k = ComplexMatrix::Zero(sub.boundary_dofs.size(), sub.boundary_dofs.size());
  for (const auto& edge : sub.boundary_edges) {
    const Point& pa = mesh.vertices[edge[0]];
    const Point& pb = mesh.vertices[edge[1]];
    const double h = std::hypot(pb.x - pa.x, pb.y - pa.y);
    const int ia = local(edge[0]), ib = local(edge[1]);
    k(ia, ia) += 1.0 / h;
    k(ib, ib) += 1.0 / h;
    k(ia, ib) -= 1.0 / h;
    k(ib, ia) -= 1.0 / h;
  }
  return k;
}

BrokenVector assemble_load(const SubdomainTopology& topo, const TraceSpaces& spaces,
                           const MediumSpec& medium, const SourceSpec& source) {
  medium.validate();
  const Mesh& mesh = *topo.mesh;
  BrokenVector f = BrokenVector::zero(spaces.volume_layout().total());

  if (const auto* vol = std::get_if<VolumeConstantSource>(&source)) {
    if (vol->value == Complex(0.0, 0.0)) return f;
    for (int j = 0; j < topo.subdomain_count(); ++j) {
      LocalIndex local(topo.subdomains[j].vertices);
      auto block = spaces.volume_layout().seg(f.coeffs, j);
      for (int t : topo.subdomains[j].triangles) {
        const auto& tri = mesh.triangles[t];
        const double area = std::abs(mesh.triangle_area(t));
        for (int r = 0; r < 3; ++r) block(local(tri[r])) += vol->value * (area / 3.0);
      }
    }
    return f;
  }

  const auto& wave = std::get<PlaneWaveSource>(source);
  const double dnorm = std::hypot(wave.dx, wave.dy);
  if (std::abs(dnorm - 1.0) > 1e-12)
    throw Error("assemble_load: plane-wave direction must have unit norm");

  const Complex i_unit(0.0, 1.0);
  const Complex kappa = medium.kappa;
  // 2-point Gauss on [-1, 1]
  const double gauss_node = 1.0 / std::sqrt(3.0);

  // Neumann data enters only through edges of Gamma_j lying on dOmega.
  std::map<std::array<int, 2>, int> global_boundary;
  for (const auto& e : mesh.boundary_edges) global_boundary[e] = 1;

  // The outward normal of a boundary edge points away from the third vertex
  // of its owning triangle; recover owners once.
  std::map<std::array<int, 2>, int> edge_owner;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k) {
      std::array<int, 2> e{std::min(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3]),
                           std::max(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3])};
      if (global_boundary.count(e)) edge_owner[e] = t;
    }

  for (int j = 0; j < topo.subdomain_count(); ++j) {
    LocalIndex local(topo.subdomains[j].vertices);
    auto block = spaces.volume_layout().seg(f.coeffs, j);
    for (const auto& edge : topo.subdomains[j].boundary_edges) {
      if (!global_boundary.count(edge)) continue;  // interior interface
      const Point& pa = mesh.vertices[edge[0]];
      const Point& pb = mesh.vertices[edge[1]];
      const double h = std::hypot(pb.x - pa.x, pb.y - pa.y);

      double nx = (pb.y - pa.y) / h, ny = -(pb.x - pa.x) / h;
      const auto& tri = mesh.triangles[edge_owner.at(edge)];
      int opposite = tri[0] + tri[1] + tri[2] - edge[0] - edge[1];
      const Point& po = mesh.vertices[opposite];
      if (nx * (po.x - pa.x) + ny * (po.y - pa.y) > 0.0) {
        nx = -nx;
        ny = -ny;
      }

      const Complex dn_factor = i_unit * kappa * (wave.dx * nx + wave.dy * ny);
      for (double s : {-gauss_node, gauss_node}) {
        const double la = 0.5 * (1.0 - s), lb = 0.5 * (1.0 + s);
        const double qx = la * pa.x + lb * pb.x;
        const double qy = la * pa.y + lb * pb.y;
        const Complex g = dn_factor * std::exp(i_unit * kappa * (wave.dx * qx + wave.dy * qy));
        const double weight = h / 2.0;  // unit Gauss weights on [-1,1]
        block(local(edge[0])) += weight * g * la;
        block(local(edge[1])) += weight * g * lb;
      }
    }
  }
  return f;
}

ComplexMatrix FemSystem::broken_helmholtz(const TraceSpaces& spaces) const {
  const auto& layout = spaces.volume_layout();
  ComplexMatrix a = ComplexMatrix::Zero(layout.total(), layout.total());
  for (int j = 0; j < layout.block_count(); ++j)
    a.block(layout.offsets[j], layout.offsets[j], layout.block_size(j), layout.block_size(j)) =
        subdomains[j].helmholtz;
  return a;
}

ComplexMatrix FemSystem::broken_h1_gram(const TraceSpaces& spaces) const {
  const auto& layout = spaces.volume_layout();
  ComplexMatrix n = ComplexMatrix::Zero(layout.total(), layout.total());
  for (int j = 0; j < layout.block_count(); ++j)
    n.block(layout.offsets[j], layout.offsets[j], layout.block_size(j), layout.block_size(j)) =
        subdomains[j].h1_gram;
  return n;
}

FemSystem assemble_system(const SubdomainTopology& topo, const MediumSpec& medium) {
  medium.validate();
  FemSystem sys;
  sys.medium = medium;
  sys.subdomains.resize(topo.subdomain_count());
  for (int j = 0; j < topo.subdomain_count(); ++j) {
    sys.subdomains[j].helmholtz = assemble_subdomain_operator(topo, j, medium);
    sys.subdomains[j].h1_gram = assemble_h1_gram(topo, j, medium.kappa_star());
    sys.subdomains[j].boundary_mass = assemble_boundary_mass(topo, j);
    sys.subdomains[j].boundary_stiffness = assemble_boundary_tangential_stiffness(topo, j);
  }
  return sys;
}

namespace {

SubdomainTopology whole_domain_topology(const Mesh& mesh) {
  Partition one;
  one.subdomain_count = 1;
  one.subdomain_of_triangle.assign(mesh.triangle_count(), 0);
  SubdomainTopology topo = extract_topology(mesh, one);
  if (static_cast<int>(topo.subdomains[0].vertices.size()) != mesh.vertex_count())
    throw Error("mesh has vertices referenced by no triangle");
  return topo;
}

}  // namespace

ComplexMatrix assemble_conforming_helmholtz(const Mesh& mesh, const MediumSpec& medium) {
  return assemble_subdomain_operator(whole_domain_topology(mesh), 0, medium);
}

ComplexMatrix assemble_conforming_gram(const Mesh& mesh, double kappa_star) {
  return assemble_h1_gram(whole_domain_topology(mesh), 0, kappa_star);
}

ComplexVector assemble_conforming_load(const Mesh& mesh, const MediumSpec& medium,
                                       const SourceSpec& source) {
  SubdomainTopology topo = whole_domain_topology(mesh);
  TraceSpaces spaces(topo);
  return assemble_load(topo, spaces, medium, source).coeffs;
}

}  // namespace helmdd
