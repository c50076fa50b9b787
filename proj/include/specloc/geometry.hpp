#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <vector>

#include <Eigen/Core>

namespace specloc {

using Point = Eigen::Vector2d;

enum class BoundaryTag { Hole, OuterCell, DirichletOuter };
enum class Region { Cell, Perforated };

const char* tag_name(BoundaryTag tag);

struct BoundaryEdge {
  std::array<int, 2> v;
  BoundaryTag tag;
};

/// Periodicity cell [0,1]^2 with a regular-polygon hole inscribed in a disk.
/// A hole_radius of 0 means no hole.
struct CellGeometry {
  Point hole_center{0.5, 0.5};
  double hole_radius = 0.25;
  int n_seg = 64;
  double h = 1.0 / 16.0;

  bool has_hole() const { return hole_radius > 0.0; }
  /// Throws GeometryError naming the violated constraint.
  void validate() const;
};

struct Mesh2D {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;
  std::map<int, int> periodic_pairs;  // slave -> partner on the opposite face
  Region region = Region::Cell;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double signed_area(int t) const;
  Point centroid(int t) const;
  double edge_length(const BoundaryEdge& e) const;
  /// Sorted, unique vertex indices touched by edges carrying `tag`.
  std::vector<int> vertices_with_tag(BoundaryTag tag) const;
};

/// Omega = (-L, L)^2 tiled by n x n cells of size epsilon = 2L/n.
struct DomainSpec {
  double half_width = 1.0;
  double epsilon = 0.25;
  CellGeometry cell;

  /// Throws ConfigurationError when 2L/epsilon is not a positive integer.
  int cells_per_side() const;
};

struct Measures {
  double area = 0.0;
  double surface = 0.0;  // total length of Hole edges
};

Mesh2D build_cell_mesh(const CellGeometry& geom);
Mesh2D build_perforated_mesh(const DomainSpec& spec);

/// Structured triangulation of [lo, hi] with nx x ny squares; every boundary
/// edge is tagged DirichletOuter.
Mesh2D build_rectangle_mesh(const Point& lo, const Point& hi, int nx, int ny);

Measures measures(const Mesh2D& mesh);

/// Checks orientation, edge incidence and periodic pairing; throws GeometryError.
void validate_mesh(const Mesh2D& mesh);

/// Debug dump: "NV NT NE", vertices, triangles, tagged edges.
void write_mesh(std::ostream& os, const Mesh2D& mesh);

}  // namespace specloc
