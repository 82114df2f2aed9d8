#include "helmdd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "helmdd/rng.hpp"

namespace helmdd {

namespace {

constexpr double degenerate_area = 1e-14;

std::array<int, 2> sorted_edge(int a, int b) { return {std::min(a, b), std::max(a, b)}; }

struct LineReader {
  std::istream& in;
  long line_number = 0;

  bool next(std::string& out) {
    while (std::getline(in, out)) {
      ++line_number;
      // strip trailing CR from files written on other platforms
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (!out.empty()) return true;
    }
    return false;
  }

  std::string expect(const char* what) {
    std::string s;
    if (!next(s)) throw ParseError(std::string("unexpected end of stream, expected ") + what, line_number);
    return s;
  }
};

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

void finalize_mesh(Mesh& mesh, long line_hint) {
  const int nv = mesh.vertex_count();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int v = mesh.triangles[t][k];
      if (v < 0 || v >= nv)
        throw ParseError("triangle " + std::to_string(t) + " references vertex " + std::to_string(v) +
                             " out of range",
                         line_hint);
    }
    if (std::abs(mesh.triangle_area(t)) <= degenerate_area)
      throw ParseError("triangle " + std::to_string(t) + " is degenerate (area <= 1e-14)", line_hint);
  }

  std::map<std::array<int, 2>, int> edge_count;
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k) edge_count[sorted_edge(tri[k], tri[(k + 1) % 3])] += 1;

  mesh.boundary_edges.clear();
  mesh.vertex_on_boundary.assign(nv, false);
  for (const auto& [edge, count] : edge_count) {
    if (count > 2)
      throw ParseError("non-manifold edge (" + std::to_string(edge[0]) + "," +
                           std::to_string(edge[1]) + ") shared by " + std::to_string(count) +
                           " triangles",
                       line_hint);
    if (count == 1) {
      mesh.boundary_edges.push_back(edge);
      mesh.vertex_on_boundary[edge[0]] = true;
      mesh.vertex_on_boundary[edge[1]] = true;
    }
  }
}

Mesh load_native(std::istream& in) {
  LineReader reader{in};
  Mesh mesh;

  if (reader.expect("$Vertices") != "$Vertices")
    throw ParseError("expected $Vertices header", reader.line_number);
  long nv = 0;
  {
    std::istringstream s(reader.expect("vertex count"));
    if (!(s >> nv) || nv <= 0) throw ParseError("invalid or empty vertex count", reader.line_number);
  }
  mesh.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    std::istringstream s(reader.expect("vertex line"));
    Point p;
    if (!(s >> p.x >> p.y)) throw ParseError("malformed vertex line", reader.line_number);
    mesh.vertices.push_back(p);
  }

  if (reader.expect("$Triangles") != "$Triangles")
    throw ParseError("expected $Triangles header", reader.line_number);
  long nt = 0;
  {
    std::istringstream s(reader.expect("triangle count"));
    if (!(s >> nt) || nt <= 0) throw ParseError("invalid or empty triangle count", reader.line_number);
  }
  mesh.triangles.reserve(nt);
  for (long i = 0; i < nt; ++i) {
    std::istringstream s(reader.expect("triangle line"));
    std::array<int, 3> tri{};
    if (!(s >> tri[0] >> tri[1] >> tri[2])) throw ParseError("malformed triangle line", reader.line_number);
    mesh.triangles.push_back(tri);
  }

  finalize_mesh(mesh, reader.line_number);
  return mesh;
}

Mesh load_msh2(std::istream& in) {
  LineReader reader{in};
  Mesh mesh;
  std::map<long, int> node_index;  // gmsh node id -> vertex index in file order

  std::string line;
  while (reader.next(line)) {
    if (line == "$MeshFormat") {
      std::istringstream s(reader.expect("format line"));
      double version = 0.0;
      int file_type = 0, data_size = 0;
      if (!(s >> version >> file_type >> data_size))
        throw ParseError("malformed $MeshFormat line", reader.line_number);
      if (version < 2.0 || version >= 3.0 || file_type != 0)
        throw ParseError("unsupported MSH version (only ASCII 2.x is read)", reader.line_number);
      if (reader.expect("$EndMeshFormat") != "$EndMeshFormat")
        throw ParseError("expected $EndMeshFormat", reader.line_number);
    } else if (line == "$Nodes") {
      long count = 0;
      {
        std::istringstream s(reader.expect("node count"));
        if (!(s >> count) || count <= 0) throw ParseError("invalid node count", reader.line_number);
      }
      for (long i = 0; i < count; ++i) {
        std::istringstream s(reader.expect("node line"));
        long id = 0;
        double x = 0, y = 0, z = 0;
        if (!(s >> id >> x >> y >> z)) throw ParseError("malformed node line", reader.line_number);
        if (node_index.count(id)) throw ParseError("duplicate node id " + std::to_string(id), reader.line_number);
        node_index[id] = mesh.vertex_count();
        mesh.vertices.push_back({x, y});
      }
      if (reader.expect("$EndNodes") != "$EndNodes")
        throw ParseError("expected $EndNodes", reader.line_number);
    } else if (line == "$Elements") {
      long count = 0;
      {
        std::istringstream s(reader.expect("element count"));
        if (!(s >> count) || count < 0) throw ParseError("invalid element count", reader.line_number);
      }
      for (long i = 0; i < count; ++i) {
        std::istringstream s(reader.expect("element line"));
        long id = 0;
        int type = 0, ntags = 0;
        if (!(s >> id >> type >> ntags)) throw ParseError("malformed element line", reader.line_number);
        for (int t = 0; t < ntags; ++t) {
          long tag;
          if (!(s >> tag)) throw ParseError("malformed element tags", reader.line_number);
        }
        if (type == 1) {
          long a, b;  // boundary line element, connectivity is derived instead
          if (!(s >> a >> b)) throw ParseError("malformed line element", reader.line_number);
        } else if (type == 2) {
          long n[3];
          if (!(s >> n[0] >> n[1] >> n[2])) throw ParseError("malformed triangle element", reader.line_number);
          std::array<int, 3> tri{};
          for (int k = 0; k < 3; ++k) {
            auto it = node_index.find(n[k]);
            if (it == node_index.end())
              throw ParseError("element references unknown node " + std::to_string(n[k]),
                               reader.line_number);
            tri[k] = it->second;
          }
          mesh.triangles.push_back(tri);
        } else {
          throw ParseError("unsupported element type " + std::to_string(type) +
                               " (only types 1 and 2 are accepted)",
                           reader.line_number);
        }
      }
      if (reader.expect("$EndElements") != "$EndElements")
        throw ParseError("expected $EndElements", reader.line_number);
    }
    // other sections ($PhysicalNames, ...) are skipped silently
  }

  if (mesh.vertices.empty()) throw ParseError("MSH stream contains no $Nodes section");
  if (mesh.triangles.empty()) throw ParseError("MSH stream contains no triangles");
  finalize_mesh(mesh, reader.line_number);
  return mesh;
}

}  // namespace

double Mesh::triangle_area(int t) const {
  const auto& tri = triangles[t];
  return signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

Mesh load_mesh(std::istream& in, MeshFormat format) {
  return format == MeshFormat::Native ? load_native(in) : load_msh2(in);
}

Mesh load_mesh_file(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open mesh file: " + path);
  return load_mesh(in, format);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  char buf[80];
  out << "$Vertices\n" << mesh.vertex_count() << "\n";
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  out << "$Triangles\n" << mesh.triangle_count() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
}

Mesh generate_structured_square(int cells_per_side, double side_length, double cx, double cy) {
  if (cells_per_side < 1) throw Error("generate_structured_square: need at least one cell per side");
  const int n = cells_per_side;
  const double h = side_length / n;
  const double x0 = cx - side_length / 2.0;
  const double y0 = cy - side_length / 2.0;

  Mesh mesh;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix) mesh.vertices.push_back({x0 + ix * h, y0 + iy * h});

  auto vid = [n](int ix, int iy) { return iy * (n + 1) + ix; };
  mesh.triangles.reserve(2 * n * n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int v00 = vid(ix, iy), v10 = vid(ix + 1, iy);
      const int v01 = vid(ix, iy + 1), v11 = vid(ix + 1, iy + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }

  finalize_mesh(mesh, -1);
  return mesh;
}

namespace {

std::vector<std::vector<int>> triangle_adjacency(const Mesh& mesh) {
  std::map<std::array<int, 2>, std::vector<int>> owners;
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int k = 0; k < 3; ++k)
      owners[sorted_edge(mesh.triangles[t][k], mesh.triangles[t][(k + 1) % 3])].push_back(t);

  std::vector<std::vector<int>> adj(mesh.triangle_count());
  for (const auto& [edge, tris] : owners)
    if (tris.size() == 2) {
      adj[tris[0]].push_back(tris[1]);
      adj[tris[1]].push_back(tris[0]);
    }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<int> bfs_distances(const std::vector<std::vector<int>>& adj, const std::vector<int>& sources) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> queue;
  for (int s : sources) {
    dist[s] = 0;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    int t = queue.front();
    queue.pop_front();
    for (int u : adj[t])
      if (dist[u] < 0) {
        dist[u] = dist[t] + 1;
        queue.push_back(u);
      }
  }
  return dist;
}

Partition grow_partition(const Mesh& mesh, const std::vector<std::vector<int>>& adj, int j_count,
                         const std::vector<int>& seeds) {
  const int nt = mesh.triangle_count();
  Partition part;
  part.subdomain_count = j_count;
  part.subdomain_of_triangle.assign(nt, -1);

  std::vector<std::deque<int>> frontier(j_count);
  std::vector<int> size(j_count, 0);
  for (int j = 0; j < j_count; ++j) {
    part.subdomain_of_triangle[seeds[j]] = j;
    size[j] = 1;
    for (int u : adj[seeds[j]]) frontier[j].push_back(u);
  }

  int assigned = j_count;
  while (assigned < nt) {
    // grow the currently smallest subdomain that still has reachable cells
    int best = -1;
    for (int j = 0; j < j_count; ++j) {
      while (!frontier[j].empty() && part.subdomain_of_triangle[frontier[j].front()] >= 0)
        frontier[j].pop_front();
      if (frontier[j].empty()) continue;
      if (best < 0 || size[j] < size[best]) best = j;
    }
    if (best < 0) break;  // enclosed leftovers handled below
    int t = frontier[best].front();
    frontier[best].pop_front();
    part.subdomain_of_triangle[t] = best;
    ++size[best];
    for (int u : adj[t])
      if (part.subdomain_of_triangle[u] < 0) frontier[best].push_back(u);
  }

  // Attach any enclosed leftovers to the smallest adjacent subdomain.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int t = 0; t < nt; ++t) {
      if (part.subdomain_of_triangle[t] >= 0) continue;
      int pick = -1;
      for (int u : adj[t]) {
        int j = part.subdomain_of_triangle[u];
        if (j >= 0 && (pick < 0 || size[j] < size[pick])) pick = j;
      }
      if (pick >= 0) {
        part.subdomain_of_triangle[t] = pick;
        ++size[pick];
        changed = true;
      }
    }
  }
  for (int t = 0; t < nt; ++t)
    if (part.subdomain_of_triangle[t] < 0)
      throw Error("build_partition: triangle adjacency graph is disconnected");
  return part;
}

double imbalance(const Partition& part) {
  std::vector<int> size(part.subdomain_count, 0);
  for (int label : part.subdomain_of_triangle) ++size[label];
  const double mean =
      static_cast<double>(part.subdomain_of_triangle.size()) / part.subdomain_count;
  double worst = 0.0;
  for (int s : size) worst = std::max(worst, std::abs(s - mean) / mean);
  return worst;
}

}  // namespace

Partition build_partition(const Mesh& mesh, int subdomain_count, std::uint64_t seed) {
  const int nt = mesh.triangle_count();
  if (subdomain_count < 1 || subdomain_count > nt)
    throw Error("build_partition: J must satisfy 1 <= J <= #triangles, got " +
                std::to_string(subdomain_count));

  if (subdomain_count == 1) {
    Partition part;
    part.subdomain_count = 1;
    part.subdomain_of_triangle.assign(nt, 0);
    return part;
  }

  const auto adj = triangle_adjacency(mesh);
  Rng rng(seed);

  Partition best;
  double best_imbalance = 1e300;
  for (int attempt = 0; attempt < 8; ++attempt) {
    // farthest-point seeding from a random start
    std::vector<int> seeds{rng.uniform_int(nt)};
    while (static_cast<int>(seeds.size()) < subdomain_count) {
      auto dist = bfs_distances(adj, seeds);
      int far = -1;
      for (int t = 0; t < nt; ++t)
        if (dist[t] >= 0 && (far < 0 || dist[t] > dist[far])) far = t;
      if (far < 0 || dist[far] == 0)
        throw Error("build_partition: not enough connected triangles for requested J");
      seeds.push_back(far);
    }
    Partition part = grow_partition(mesh, adj, subdomain_count, seeds);
    double im = imbalance(part);
    if (im < best_imbalance) {
      best = part;
      best_imbalance = im;
    }
    if (best_imbalance <= 0.30) break;
  }
  if (best_imbalance > 0.30)
    throw Error("build_partition: could not balance subdomains within 30% on this mesh");
  validate_partition(mesh, best);
  return best;
}

Partition load_partition(std::istream& in, const Mesh& mesh) {
  Partition part;
  std::vector<int>& labels = part.subdomain_of_triangle;
  long value;
  while (in >> value) labels.push_back(static_cast<int>(value));
  if (static_cast<int>(labels.size()) != mesh.triangle_count())
    throw Error("load_partition: " + std::to_string(labels.size()) + " labels for " +
                std::to_string(mesh.triangle_count()) + " triangles");
  int max_label = -1;
  for (int label : labels) {
    if (label < 0) throw Error("load_partition: negative subdomain label");
    max_label = std::max(max_label, label);
  }
  part.subdomain_count = max_label + 1;
  validate_partition(mesh, part);
  return part;
}

Partition load_partition_file(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open partition file: " + path);
  return load_partition(in, mesh);
}

void validate_partition(const Mesh& mesh, const Partition& partition) {
  if (static_cast<int>(partition.subdomain_of_triangle.size()) != mesh.triangle_count())
    throw Error("partition size does not match triangle count");
  std::vector<int> size(partition.subdomain_count, 0);
  for (int label : partition.subdomain_of_triangle) {
    if (label < 0 || label >= partition.subdomain_count)
      throw Error("partition label out of range");
    ++size[label];
  }
  for (int j = 0; j < partition.subdomain_count; ++j)
    if (size[j] == 0) throw Error("subdomain " + std::to_string(j) + " is empty");
}

SubdomainTopology extract_topology(const Mesh& mesh, const Partition& partition) {
  validate_partition(mesh, partition);

  SubdomainTopology topo;
  topo.mesh = &mesh;
  topo.subdomains.resize(partition.subdomain_count);

  for (int t = 0; t < mesh.triangle_count(); ++t)
    topo.subdomains[partition.subdomain_of_triangle[t]].triangles.push_back(t);

  for (auto& sub : topo.subdomains) {
    std::set<int> vertex_set;
    std::map<std::array<int, 2>, int> edge_count;
    for (int t : sub.triangles) {
      const auto& tri = mesh.triangles[t];
      for (int k = 0; k < 3; ++k) {
        vertex_set.insert(tri[k]);
        edge_count[sorted_edge(tri[k], tri[(k + 1) % 3])] += 1;
      }
    }
    sub.vertices.assign(vertex_set.begin(), vertex_set.end());

    std::set<int> boundary_set;
    for (const auto& [edge, count] : edge_count)
      if (count == 1) {
        sub.boundary_edges.push_back(edge);
        boundary_set.insert(edge[0]);
        boundary_set.insert(edge[1]);
      }
    sub.boundary_dofs.assign(boundary_set.begin(), boundary_set.end());
  }

  std::map<int, int> mult;  // global vertex id -> m(x)
  for (const auto& sub : topo.subdomains)
    for (int v : sub.boundary_dofs) mult[v] += 1;

  for (const auto& [v, m] : mult) {
    topo.skeleton_dofs.push_back(v);
    topo.multiplicity.push_back(m);
    topo.cross_point.push_back(m >= 3 || (m == 2 && mesh.vertex_on_boundary[v]));
  }
  return topo;
}

}  // namespace helmdd
