#pragma once

#include <variant>

#include "helmdd/spaces.hpp"

namespace helmdd {

/// Constant-coefficient medium. kappa_star = max(1, |kappa|) is the weight
/// of the L2 part of the H1 norm.
struct MediumSpec {
  Complex kappa{0.0, 0.0};
  double mu = 1.0;

  double kappa_star() const;
  void validate() const;  // Re/Im kappa >= 0, mu > 0
};

/// Volume source with constant density f (and no boundary data), or an
/// incident plane wave entering through the Neumann datum g = dn u_inc on
/// the external boundary (with f = 0).
struct VolumeConstantSource {
  Complex value{0.0, 0.0};
};
struct PlaneWaveSource {
  double dx = 0.0;
  double dy = 0.0;
};
using SourceSpec = std::variant<VolumeConstantSource, PlaneWaveSource>;

/// All P1 matrices attached to one subdomain. Volume matrices are indexed by
/// the subdomain vertex list, boundary matrices by dof(Gamma_j), both in
/// ascending global-vertex order (the TraceSpaces conventions).
struct SubdomainForms {
  ComplexMatrix helmholtz;            // A_j = mu K_j - kappa^2 M_j (complex symmetric)
  ComplexMatrix h1_gram;              // N_j = K_j + kappa_star^2 M_j (HPD)
  ComplexMatrix boundary_mass;        // M_Gamma_j (HPD)
  ComplexMatrix boundary_stiffness;   // K_Gamma_j (Hermitian PSD)
};

ComplexMatrix assemble_subdomain_operator(const SubdomainTopology& topo, int j,
                                          const MediumSpec& medium);
ComplexMatrix assemble_h1_gram(const SubdomainTopology& topo, int j, double kappa_star);
ComplexMatrix assemble_boundary_mass(const SubdomainTopology& topo, int j);
ComplexMatrix assemble_boundary_tangential_stiffness(const SubdomainTopology& topo, int j);

/// Load functional over the broken space. The Neumann term integrates only
/// over dOmega_j intersected with dOmega; plane-wave data uses 2-point Gauss
/// per edge.
BrokenVector assemble_load(const SubdomainTopology& topo, const TraceSpaces& spaces,
                           const MediumSpec& medium, const SourceSpec& source);

/// Forms of every subdomain plus the load, bundled for the solver layer.
struct FemSystem {
  MediumSpec medium;
  std::vector<SubdomainForms> subdomains;

  ComplexMatrix broken_helmholtz(const TraceSpaces& spaces) const;  // blockdiag(A_j)
  ComplexMatrix broken_h1_gram(const TraceSpaces& spaces) const;    // blockdiag(N_j)
};

FemSystem assemble_system(const SubdomainTopology& topo, const MediumSpec& medium);

/// Single-domain assemblies over the whole mesh, indexed by global vertex.
/// Every vertex must be referenced by some triangle.
ComplexMatrix assemble_conforming_helmholtz(const Mesh& mesh, const MediumSpec& medium);
ComplexMatrix assemble_conforming_gram(const Mesh& mesh, double kappa_star);
ComplexVector assemble_conforming_load(const Mesh& mesh, const MediumSpec& medium,
                                       const SourceSpec& source);

}  // namespace helmdd
