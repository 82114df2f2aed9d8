#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "helmdd/errors.hpp"

namespace helmdd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Conforming 2D triangulation. Boundary edges are derived at load time as
/// the edges owned by exactly one triangle; an edge owned by three or more
/// triangles is rejected as non-manifold.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> boundary_edges;  // sorted vertex pairs
  std::vector<bool> vertex_on_boundary;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
};

enum class MeshFormat { Native, Msh2 };

Mesh load_mesh(std::istream& in, MeshFormat format);
Mesh load_mesh_file(const std::string& path, MeshFormat format);
void write_mesh(std::ostream& out, const Mesh& mesh);  // native format

/// Structured n x n cell square of given side length centered at (cx, cy),
/// two triangles per cell. Vertices are numbered row-major bottom-up.
Mesh generate_structured_square(int cells_per_side, double side_length = 2.0, double cx = 0.0,
                                double cy = 0.0);

/// Non-overlapping subdomain labels, one per triangle.
struct Partition {
  std::vector<int> subdomain_of_triangle;
  int subdomain_count = 0;
};

/// Deterministic seeded region-growing partitioner over the triangle
/// adjacency graph. Guarantees edge-connected, non-empty subdomains with
/// triangle counts balanced within +-30%.
Partition build_partition(const Mesh& mesh, int subdomain_count, std::uint64_t seed);

Partition load_partition(std::istream& in, const Mesh& mesh);
Partition load_partition_file(const std::string& path, const Mesh& mesh);
void validate_partition(const Mesh& mesh, const Partition& partition);

/// Skeleton topology of a partitioned mesh: per-subdomain triangle/vertex
/// sets, boundary edges of each Gamma_j, boundary dof sets, and the global
/// skeleton dof list with multiplicities and cross-point flags.
struct SubdomainTopology {
  struct Subdomain {
    std::vector<int> triangles;
    std::vector<int> vertices;                      // dof(Omega_j), ascending
    std::vector<std::array<int, 2>> boundary_edges; // edges of Gamma_j
    std::vector<int> boundary_dofs;                 // dof(Gamma_j), ascending
  };

  std::vector<Subdomain> subdomains;
  std::vector<int> skeleton_dofs;     // dof(Sigma), ascending global vertex ids
  std::vector<int> multiplicity;      // m(x) per skeleton dof
  std::vector<bool> cross_point;      // per skeleton dof
  const Mesh* mesh = nullptr;

  int subdomain_count() const { return static_cast<int>(subdomains.size()); }
};

SubdomainTopology extract_topology(const Mesh& mesh, const Partition& partition);

}  // namespace helmdd
