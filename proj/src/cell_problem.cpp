#include "specloc/cell_problem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/SparseLU>

#include "specloc/error.hpp"
#include "specloc/format.hpp"

namespace specloc {

/// Uniform bucket grid over [0,1]^2 listing the triangles whose bounding box
/// touches each bucket.
class CellLocator {
 public:
  explicit CellLocator(const Mesh2D& mesh) : mesh_(mesh) {
    buckets_.resize(size_t(kGrid) * kGrid);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      Point lo = mesh.vertices[mesh.triangles[t][0]], hi = lo;
      for (int v : mesh.triangles[t]) {
        lo = lo.cwiseMin(mesh.vertices[v]);
        hi = hi.cwiseMax(mesh.vertices[v]);
      }
      const int i0 = bucket(lo.x() - kPad), i1 = bucket(hi.x() + kPad);
      const int j0 = bucket(lo.y() - kPad), j1 = bucket(hi.y() + kPad);
      for (int i = i0; i <= i1; ++i)
        for (int j = j0; j <= j1; ++j) buckets_[size_t(j) * kGrid + i].push_back(t);
    }
  }

  /// Triangle containing y and its barycentric coordinates, or -1 if y lies in the hole.
  int locate(const Point& y, Eigen::Vector3d& bary) const {
    int best = -1;
    double best_min = -std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_bary;
    for (int t : buckets_[size_t(bucket(y.y())) * kGrid + bucket(y.x())]) {
      const auto& tri = mesh_.triangles[t];
      const Point& p0 = mesh_.vertices[tri[0]];
      const Point e1 = mesh_.vertices[tri[1]] - p0, e2 = mesh_.vertices[tri[2]] - p0, d = y - p0;
      const double det = e1.x() * e2.y() - e1.y() * e2.x();
      const double l1 = (d.x() * e2.y() - d.y() * e2.x()) / det;
      const double l2 = (e1.x() * d.y() - e1.y() * d.x()) / det;
      const Eigen::Vector3d b(1.0 - l1 - l2, l1, l2);
      if (b.minCoeff() > best_min) {
        best_min = b.minCoeff();
        best = t;
        best_bary = b;
      }
    }
    if (best < 0 || best_min < -1e-9) return -1;
    bary = best_bary.cwiseMax(0.0);
    bary /= bary.sum();
    return best;
  }

 private:
  static constexpr int kGrid = 32;
  static constexpr double kPad = 1e-9;
  static int bucket(double c) { return std::clamp(static_cast<int>(std::floor(c * kGrid)), 0, kGrid - 1); }

  const Mesh2D& mesh_;
  std::vector<std::vector<int>> buckets_;
};

namespace {

// -int a e_k . grad phi_i with centroid sampling. `magnitude` collects the
// absolute contributions per vertex, a scale for the round-off floor.
Vector corrector_rhs(const Mesh2D& mesh, const DiffusionCoefficient& a, int k, Vector& magnitude) {
  Vector b = Vector::Zero(mesh.num_vertices());
  magnitude = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto g = basis_gradients(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    const Eigen::Vector2d flux = a.at(mesh.centroid(t)).col(k);
    const double area = mesh.signed_area(t);
    for (int i = 0; i < 3; ++i) {
      const double c = area * flux.dot(g.col(i));
      b[tri[i]] -= c;
      magnitude[tri[i]] += std::abs(c);
    }
  }
  return b;
}

Eigen::Vector2d element_gradient(const Mesh2D& mesh, int t, const Vector& u) {
  const auto& tri = mesh.triangles[t];
  const auto g = basis_gradients(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
  return g.col(0) * u[tri[0]] + g.col(1) * u[tri[1]] + g.col(2) * u[tri[2]];
}

}  // namespace

CorrectorSet solve_correctors(const Mesh2D& cell_mesh, const DiffusionCoefficient& a) {
  if (cell_mesh.region != Region::Cell) throw ConstraintError("correctors need a cell mesh");
  a.validate();
  auto mesh = std::make_shared<const Mesh2D>(cell_mesh);

  CorrectorSet out;
  out.mesh = mesh;
  out.locator = std::make_shared<const CellLocator>(*mesh);
  out.a = a;
  out.cell = measures(*mesh);

  const Reduction red = Reduction::periodic(mesh->num_vertices(), mesh->periodic_pairs);
  const SparseMatrix k = red.reduce(assemble_stiffness(*mesh, a, 1.0));
  const Vector w = red.reduce(lumped_mass(*mesh));
  const SparseMatrix saddle = append_mean_zero(k, w);
  const int m = red.reduced_size();

  Eigen::SparseLU<SparseMatrix> lu;
  bool factored = false;
  for (int dir = 0; dir < 2; ++dir) {
    Vector magnitude;
    const Vector b = red.reduce(corrector_rhs(*mesh, a, dir, magnitude));
    if ((b.cwiseAbs() - 1e-13 * red.reduce(magnitude)).maxCoeff() <= 0.0) {
      // Zero source: the mean-zero solution is exactly zero.
      out.n[dir] = Vector::Zero(mesh->num_vertices());
      continue;
    }
    if (!factored) {
      lu.analyzePattern(saddle);
      lu.factorize(saddle);
      if (lu.info() != Eigen::Success)
        throw ConstraintError("corrector saddle system is singular; check the periodic pairing");
      factored = true;
    }
    Vector rhs = Vector::Zero(m + 1);
    rhs.head(m) = b;
    const Vector sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite())
      throw ConstraintError("corrector saddle system is singular; check the periodic pairing");
    const double res = (saddle * sol - rhs).norm() / rhs.norm();
    out.residual = std::max(out.residual, res);
    if (!(res <= 1e-10)) {
      std::ostringstream os;
      os << "corrector solve residual " << res << " exceeds 1e-10";
      throw ConsistencyError(os.str());
    }
    out.n[dir] = red.scatter(Vector(sol.head(m)));
  }
  return out;
}

Eigen::Matrix2d effective_tensor(const CorrectorSet& c) {
  const Mesh2D& mesh = *c.mesh;
  Eigen::Matrix2d sum = Eigen::Matrix2d::Zero();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Matrix2d at = c.a.at(mesh.centroid(t));
    Eigen::Matrix2d grad;  // column j: e_j + grad N_j
    for (int j = 0; j < 2; ++j) grad.col(j) = Eigen::Vector2d::Unit(j) + element_gradient(mesh, t, c.n[j]);
    sum += mesh.signed_area(t) * at * grad;
  }
  const Eigen::Matrix2d a_eff = sum / c.cell.area;
  const double asym = std::abs(a_eff(0, 1) - a_eff(1, 0));
  if (asym > 1e-10) {
    std::ostringstream os;
    os << "effective tensor asymmetry " << asym << " exceeds 1e-10";
    throw ConsistencyError(os.str());
  }
  return 0.5 * (a_eff + a_eff.transpose());
}

double corrector_energy(const CorrectorSet& c, int j, const Vector& phi) {
  const Mesh2D& mesh = *c.mesh;
  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Eigen::Vector2d g = Eigen::Vector2d::Unit(j) + element_gradient(mesh, t, phi);
    e += mesh.signed_area(t) * g.dot(c.a.at(mesh.centroid(t)) * g);
  }
  return e / c.cell.area;
}

CorrectorSample corrector_eval(const CorrectorSet& c, const Point& point, double scale, const Point& origin) {
  Point y = (point - origin) / scale;
  y = y.array() - y.array().floor();
  CorrectorSample s;
  Eigen::Vector3d bary;
  const int t = c.locator->locate(y, bary);
  if (t < 0) {
    s.in_hole = true;
    return s;
  }
  const auto& tri = c.mesh->triangles[t];
  for (int k = 0; k < 2; ++k) {
    s.value[k] = bary[0] * c.n[k][tri[0]] + bary[1] * c.n[k][tri[1]] + bary[2] * c.n[k][tri[2]];
    s.gradient.row(k) = element_gradient(*c.mesh, t, c.n[k]).transpose();
  }
  return s;
}

void write_effective_csv(std::ostream& os, const Eigen::Matrix2d& a_eff, const Measures& cell) {
  os << "a11,a12,a22,cellArea,holePerimeter\n";
  os << format_number(a_eff(0, 0)) << ',' << format_number(a_eff(0, 1)) << ',' << format_number(a_eff(1, 1)) << ','
     << format_number(cell.area) << ',' << format_number(cell.surface) << '\n';
}

}  // namespace specloc
