#include "specloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "specloc/error.hpp"

namespace specloc {

namespace {

constexpr double kMergeTol = 1e-10;

/// Deduplicates vertices by coordinate, so that template copies glue together.
class VertexMerger {
 public:
  explicit VertexMerger(std::vector<Point>& out) : out_(out) {}

  int insert(const Point& p) {
    const long long kx = std::llround(p.x() / kMergeTol);
    const long long ky = std::llround(p.y() / kMergeTol);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = index_.find(key(kx + dx, ky + dy));
        if (it != index_.end() && (out_[it->second] - p).norm() < 4 * kMergeTol) return it->second;
      }
    }
    const int id = static_cast<int>(out_.size());
    out_.push_back(p);
    index_.emplace(key(kx, ky), id);
    return id;
  }

 private:
  struct Key {
    long long x, y;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      return std::hash<long long>()(k.x) * 1000003u ^ std::hash<long long>()(k.y);
    }
  };
  static Key key(long long x, long long y) { return {x, y}; }

  std::vector<Point>& out_;
  std::unordered_map<Key, int, KeyHash> index_;
};

void add_triangle(Mesh2D& mesh, int a, int b, int c) {
  const Point& pa = mesh.vertices[a];
  const Point& pb = mesh.vertices[b];
  const Point& pc = mesh.vertices[c];
  const double det = (pb - pa).x() * (pc - pa).y() - (pb - pa).y() * (pc - pa).x();
  if (det > 0)
    mesh.triangles.push_back({a, b, c});
  else
    mesh.triangles.push_back({a, c, b});
}

/// Splits the quad a-b-c-d (in cyclic order) along its shorter diagonal; on a
/// tie a centre vertex is inserted so the split stays mirror symmetric.
void add_quad(Mesh2D& mesh, VertexMerger& merger, int a, int b, int c, int d) {
  const auto& v = mesh.vertices;
  const double ac = (v[a] - v[c]).norm();
  const double bd = (v[b] - v[d]).norm();
  if (std::abs(ac - bd) <= 1e-12 * std::max(ac, bd)) {
    const Point centre = 0.25 * (v[a] + v[b] + v[c] + v[d]);
    const int m = merger.insert(centre);
    add_triangle(mesh, a, b, m);
    add_triangle(mesh, b, c, m);
    add_triangle(mesh, c, d, m);
    add_triangle(mesh, d, a, m);
  } else if (ac < bd) {
    add_triangle(mesh, a, b, c);
    add_triangle(mesh, a, c, d);
  } else {
    add_triangle(mesh, a, b, d);
    add_triangle(mesh, b, c, d);
  }
}

double snap(double x) {
  if (std::abs(x) < 1e-12) return 0.0;
  if (std::abs(x - 1.0) < 1e-12) return 1.0;
  return x;
}

Mesh2D unit_square_mesh(double h) {
  const int m = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-12)));
  Mesh2D mesh = build_rectangle_mesh(Point(0, 0), Point(1, 1), m, m);
  for (auto& e : mesh.boundary_edges) e.tag = BoundaryTag::OuterCell;
  return mesh;
}

/// Rotation by k quarter turns about (0.5, 0.5).
Point quarter_turn(const Point& p, int k) {
  Point q = p;
  for (int i = 0; i < k; ++i) q = Point(0.5 - (q.y() - 0.5), 0.5 + (q.x() - 0.5));
  return Point(snap(q.x()), snap(q.y()));
}

Mesh2D perforated_cell_mesh(const CellGeometry& geom) {
  const int n = geom.n_seg;
  const int per_side = n / 4;
  const double offset = (n % 8 == 0) ? 0.0 : std::numbers::pi / n;
  const int first = (n % 8 == 0) ? 5 * n / 8 : (5 * n - 4) / 8;
  const int sub = std::max(1, static_cast<int>(std::ceil((1.0 / per_side) / geom.h - 1e-9)));
  const int m = per_side * sub;

  // Master region: between the bottom side of the square and the arc of the
  // polygon facing it (angles 5pi/4 .. 7pi/4).
  std::vector<Point> arc(m + 1), side(m + 1);
  for (int k = 0; k < per_side; ++k) {
    const double t0 = offset + 2.0 * std::numbers::pi * (first + k) / n;
    const double t1 = offset + 2.0 * std::numbers::pi * (first + k + 1) / n;
    const Point p0 = geom.hole_center + geom.hole_radius * Point(std::cos(t0), std::sin(t0));
    const Point p1 = geom.hole_center + geom.hole_radius * Point(std::cos(t1), std::sin(t1));
    for (int s = 0; s <= sub; ++s) arc[k * sub + s] = p0 + (p1 - p0) * (double(s) / sub);
  }
  for (int i = 0; i <= m; ++i) side[i] = Point(double(i) / m, 0.0);
  // Mirror the arc exactly so the region is symmetric under y1 -> 1 - y1.
  for (int i = 0; i <= m / 2; ++i) {
    arc[m - i] = Point(1.0 - arc[i].x(), arc[i].y());
    side[m - i] = Point(1.0 - side[i].x(), 0.0);
  }
  if (m % 2 == 0) arc[m / 2].x() = 0.5;

  double longest = 0.0;
  for (int i = 0; i <= m; ++i) longest = std::max(longest, (side[i] - arc[i]).norm());
  const int layers = std::max(1, static_cast<int>(std::ceil(longest / geom.h - 1e-9)));

  Mesh2D mesh;
  mesh.region = Region::Cell;
  VertexMerger merger(mesh.vertices);
  for (int rot = 0; rot < 4; ++rot) {
    std::vector<std::vector<int>> id(m + 1, std::vector<int>(layers + 1));
    for (int i = 0; i <= m; ++i)
      for (int l = 0; l <= layers; ++l) {
        const double t = double(l) / layers;
        id[i][l] = merger.insert(quarter_turn((1.0 - t) * arc[i] + t * side[i], rot));
      }
    for (int i = 0; i < m; ++i)
      for (int l = 0; l < layers; ++l)
        add_quad(mesh, merger, id[i][l], id[i + 1][l], id[i + 1][l + 1], id[i][l + 1]);
    for (int i = 0; i < m; ++i) {
      mesh.boundary_edges.push_back({{id[i][0], id[i + 1][0]}, BoundaryTag::Hole});
      mesh.boundary_edges.push_back({{id[i][layers], id[i + 1][layers]}, BoundaryTag::OuterCell});
    }
  }
  return mesh;
}

void pair_periodic_faces(Mesh2D& mesh) {
  auto& v = mesh.vertices;
  std::vector<int> left, bottom;
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (v[i].x() == 0.0) left.push_back(i);
    if (v[i].y() == 0.0) bottom.push_back(i);
  }
  auto find_partner = [&](const std::vector<int>& candidates, double coord, bool by_y) {
    for (int c : candidates) {
      const double other = by_y ? v[c].y() : v[c].x();
      if (std::abs(other - coord) < 1e-9) return c;
    }
    throw GeometryError("cell mesh: no periodic partner on the opposite face");
  };
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    if (v[i].x() == 1.0) {
      const int p = find_partner(left, v[i].y(), true);
      v[i].y() = v[p].y();
      mesh.periodic_pairs[i] = p;
    } else if (v[i].y() == 1.0) {
      const int p = find_partner(bottom, v[i].x(), false);
      v[i].x() = v[p].x();
      mesh.periodic_pairs[i] = p;
    }
  }
}

}  // namespace

const char* tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Hole: return "HOLE";
    case BoundaryTag::OuterCell: return "OUTER";
    case BoundaryTag::DirichletOuter: return "DIRICHLET";
  }
  return "?";
}

void CellGeometry::validate() const {
  if (!(h > 0.0) || h > 0.5) throw GeometryError("cell mesh size h must lie in (0, 0.5]");
  if (hole_radius < 0.0) throw GeometryError("hole_radius must be non-negative");
  if (!has_hole()) return;
  if (hole_radius >= 0.5) throw GeometryError("hole_radius must lie in (0, 0.5)");
  if (n_seg < 8 || n_seg % 2 != 0)
    throw GeometryError("n_seg must be an even integer >= 8");
  if (n_seg % 4 != 0)
    throw GeometryError("n_seg must be divisible by 4 for the quarter-symmetric cell mesher");
  if ((hole_center - Point(0.5, 0.5)).norm() > 1e-14)
    throw GeometryError("the cell mesher requires the hole centred at (0.5, 0.5)");
  const double to_boundary = std::min({hole_center.x(), 1.0 - hole_center.x(), hole_center.y(),
                                       1.0 - hole_center.y()});
  if (hole_radius + h >= to_boundary) {
    std::ostringstream os;
    os << "hole clearance violated: hole_radius + h = " << hole_radius + h
       << " must be < distance from hole centre to the cell boundary = " << to_boundary;
    throw GeometryError(os.str());
  }
}

int DomainSpec::cells_per_side() const {
  if (!(half_width > 0.0)) throw ConfigurationError("half_width must be positive");
  if (!(epsilon > 0.0)) throw ConfigurationError("epsilon must be positive");
  const double ratio = 2.0 * half_width / epsilon;
  const long long n = std::llround(ratio);
  if (n < 1 || std::abs(ratio - double(n)) > 1e-9 * ratio) {
    std::ostringstream os;
    os << "2L/epsilon = " << ratio << " is not a positive integer";
    throw ConfigurationError(os.str());
  }
  return static_cast<int>(n);
}

double Mesh2D::signed_area(int t) const {
  const auto& tri = triangles[t];
  const Point a = vertices[tri[1]] - vertices[tri[0]];
  const Point b = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Point Mesh2D::centroid(int t) const {
  const auto& tri = triangles[t];
  return (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]) / 3.0;
}

double Mesh2D::edge_length(const BoundaryEdge& e) const {
  return (vertices[e.v[0]] - vertices[e.v[1]]).norm();
}

std::vector<int> Mesh2D::vertices_with_tag(BoundaryTag tag) const {
  std::vector<int> out;
  for (const auto& e : boundary_edges)
    if (e.tag == tag) out.insert(out.end(), e.v.begin(), e.v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Mesh2D build_rectangle_mesh(const Point& lo, const Point& hi, int nx, int ny) {
  if (nx < 1 || ny < 1) throw GeometryError("rectangle mesh needs at least one cell per side");
  Mesh2D mesh;
  mesh.region = Region::Cell;
  mesh.vertices.reserve(size_t(nx + 1) * (ny + 1));
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? hi.x() : lo.x() + (hi.x() - lo.x()) * i / nx;
      const double y = (j == ny) ? hi.y() : lo.y() + (hi.y() - lo.y()) * j / ny;
      mesh.vertices.emplace_back(x, y);
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  for (int i = 0; i < nx; ++i) {
    mesh.boundary_edges.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::DirichletOuter});
    mesh.boundary_edges.push_back({{id(i, ny), id(i + 1, ny)}, BoundaryTag::DirichletOuter});
  }
  for (int j = 0; j < ny; ++j) {
    mesh.boundary_edges.push_back({{id(0, j), id(0, j + 1)}, BoundaryTag::DirichletOuter});
    mesh.boundary_edges.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::DirichletOuter});
  }
  return mesh;
}

Mesh2D build_cell_mesh(const CellGeometry& geom) {
  geom.validate();
  Mesh2D mesh = geom.has_hole() ? perforated_cell_mesh(geom) : unit_square_mesh(geom.h);
  pair_periodic_faces(mesh);
  return mesh;
}

Mesh2D build_perforated_mesh(const DomainSpec& spec) {
  const int n = spec.cells_per_side();
  const Mesh2D cell = build_cell_mesh(spec.cell);
  const double L = spec.half_width;
  const double eps = 2.0 * L / n;

  Mesh2D mesh;
  mesh.region = Region::Perforated;
  mesh.vertices.reserve(size_t(n) * n * cell.vertices.size());
  mesh.triangles.reserve(size_t(n) * n * cell.triangles.size());
  VertexMerger merger(mesh.vertices);
  std::vector<int> local(cell.vertices.size());
  auto on_outer = [L](const Point& p) {
    return std::abs(std::abs(p.x()) - L) < 1e-9 * L || std::abs(std::abs(p.y()) - L) < 1e-9 * L;
  };
  for (int cj = 0; cj < n; ++cj)
    for (int ci = 0; ci < n; ++ci) {
      for (size_t v = 0; v < cell.vertices.size(); ++v) {
        const Point& y = cell.vertices[v];
        Point x(-L + eps * (ci + y.x()), -L + eps * (cj + y.y()));
        if (ci == 0 && y.x() == 0.0) x.x() = -L;
        if (ci == n - 1 && y.x() == 1.0) x.x() = L;
        if (cj == 0 && y.y() == 0.0) x.y() = -L;
        if (cj == n - 1 && y.y() == 1.0) x.y() = L;
        local[v] = merger.insert(x);
      }
      for (const auto& t : cell.triangles) mesh.triangles.push_back({local[t[0]], local[t[1]], local[t[2]]});
      for (const auto& e : cell.boundary_edges) {
        const std::array<int, 2> ev{local[e.v[0]], local[e.v[1]]};
        if (e.tag == BoundaryTag::Hole) {
          mesh.boundary_edges.push_back({ev, BoundaryTag::Hole});
        } else if (on_outer(mesh.vertices[ev[0]]) && on_outer(mesh.vertices[ev[1]])) {
          const Point mid = 0.5 * (mesh.vertices[ev[0]] + mesh.vertices[ev[1]]);
          if (on_outer(mid)) mesh.boundary_edges.push_back({ev, BoundaryTag::DirichletOuter});
        }
      }
    }
  return mesh;
}

Measures measures(const Mesh2D& mesh) {
  Measures m;
  for (int t = 0; t < mesh.num_triangles(); ++t) m.area += mesh.signed_area(t);
  for (const auto& e : mesh.boundary_edges)
    if (e.tag == BoundaryTag::Hole) m.surface += mesh.edge_length(e);
  return m;
}

void validate_mesh(const Mesh2D& mesh) {
  const int nv = mesh.num_vertices();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= nv) throw GeometryError("triangle references a missing vertex");
    if (!(mesh.signed_area(t) > 0.0)) {
      std::ostringstream os;
      os << "triangle " << t << " has non-positive signed area " << mesh.signed_area(t);
      throw GeometryError(os.str());
    }
  }
  std::map<std::pair<int, int>, int> incidence;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      ++incidence[{std::min(a, b), std::max(a, b)}];
    }
  std::map<std::pair<int, int>, int> boundary;
  for (const auto& e : mesh.boundary_edges) {
    auto key = std::make_pair(std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1]));
    if (++boundary[key] > 1) throw GeometryError("boundary edge listed twice");
    auto it = incidence.find(key);
    if (it == incidence.end() || it->second != 1)
      throw GeometryError("boundary edge does not belong to exactly one triangle");
  }
  for (const auto& [key, count] : incidence) {
    if (count > 2) throw GeometryError("edge shared by more than two triangles");
    if (count == 1 && !boundary.count(key))
      throw GeometryError("mesh edge with a single triangle is not tagged as boundary");
  }
  for (const auto& [slave, master] : mesh.periodic_pairs) {
    if (slave < 0 || slave >= nv || master < 0 || master >= nv)
      throw GeometryError("periodic pair references a missing vertex");
    const Point& s = mesh.vertices[slave];
    const Point& m = mesh.vertices[master];
    const bool x_face = s.x() == 1.0 && m.x() == 0.0 && std::abs(s.y() - m.y()) <= 1e-12;
    const bool y_face = s.y() == 1.0 && m.y() == 0.0 && std::abs(s.x() - m.x()) <= 1e-12;
    if (!x_face && !y_face) throw GeometryError("periodic pair does not match opposite faces");
  }
}

void write_mesh(std::ostream& os, const Mesh2D& mesh) {
  os.precision(17);
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges.size() << '\n';
  for (const auto& v : mesh.vertices) os << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) os << e.v[0] << ' ' << e.v[1] << ' ' << tag_name(e.tag) << '\n';
}

}  // namespace specloc
