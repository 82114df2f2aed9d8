#pragma once

// Shared fixtures for the test suites.

#include <sstream>

#include "helmdd/mesh.hpp"

namespace helmdd::testing {

/// Unit square split along the diagonal 0-2: vertices (0,0),(1,0),(1,1),(0,1),
/// triangles (0,1,2) and (0,2,3).
inline Mesh two_triangle_square() {
  std::istringstream in(
      "$Vertices\n4\n0 0\n1 0\n1 1\n0 1\n"
      "$Triangles\n2\n0 1 2\n0 2 3\n");
  return load_mesh(in, MeshFormat::Native);
}

/// Quadrant labels for a mesh centered at (cx, cy): 0 = lower-left,
/// 1 = lower-right, 2 = upper-left, 3 = upper-right.
inline Partition quadrant_partition(const Mesh& mesh, double cx = 0.0, double cy = 0.0) {
  Partition part;
  part.subdomain_count = 4;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double x = 0.0, y = 0.0;
    for (int k = 0; k < 3; ++k) {
      x += mesh.vertices[tri[k]].x / 3.0;
      y += mesh.vertices[tri[k]].y / 3.0;
    }
    part.subdomain_of_triangle.push_back((x > cx ? 1 : 0) + (y > cy ? 2 : 0));
  }
  validate_partition(mesh, part);
  return part;
}

/// Two halves split at x = cx.
inline Partition halves_partition(const Mesh& mesh, double cx = 0.0) {
  Partition part;
  part.subdomain_count = 2;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double x = 0.0;
    for (int k = 0; k < 3; ++k) x += mesh.vertices[tri[k]].x / 3.0;
    part.subdomain_of_triangle.push_back(x > cx ? 1 : 0);
  }
  validate_partition(mesh, part);
  return part;
}

inline Partition single_partition(const Mesh& mesh) {
  Partition part;
  part.subdomain_count = 1;
  part.subdomain_of_triangle.assign(mesh.triangle_count(), 0);
  return part;
}

}  // namespace helmdd::testing
