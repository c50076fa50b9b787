#include "specloc/fem.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/LU>

#include "specloc/error.hpp"

namespace specloc {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

SparseMatrix from_triplets(int n, const Triplets& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Degree-4 symmetric rule on the reference triangle (barycentric, weights sum to 1).
struct QuadPoint {
  double l0, l1, l2, w;
};
constexpr QuadPoint kDegree4[] = {
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
};

}  // namespace

Eigen::Matrix<double, 2, 3> basis_gradients(const Point& p0, const Point& p1, const Point& p2) {
  const double det = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
  Eigen::Matrix<double, 2, 3> g;
  g.col(0) << p1.y() - p2.y(), p2.x() - p1.x();
  g.col(1) << p2.y() - p0.y(), p0.x() - p2.x();
  g.col(2) << p0.y() - p1.y(), p1.x() - p0.x();
  return g / det;
}

Eigen::Matrix3d element_stiffness(const Point& p0, const Point& p1, const Point& p2,
                                  const Eigen::Matrix2d& a) {
  const auto g = basis_gradients(p0, p1, p2);
  const double area = 0.5 * std::abs((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      k(i, j) = area * g.col(i).dot(a * g.col(j));
      k(j, i) = k(i, j);
    }
  return k;
}

SparseMatrix assemble_stiffness(const Mesh2D& mesh, const DiffusionCoefficient& a, double scale,
                                const Point& origin) {
  if (!(scale > 0.0)) throw CoefficientError("coefficient scale must be positive");
  Triplets trip;
  trip.reserve(size_t(9) * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Matrix2d at = a.at((mesh.centroid(t) - origin) / scale);
    if (at(0, 1) != at(1, 0) || !(at.determinant() > 0.0) || !(at(0, 0) > 0.0)) {
      std::ostringstream os;
      os << "diffusion coefficient is not SPD at the centroid of triangle " << t;
      throw CoefficientError(os.str());
    }
    const auto k = element_stiffness(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]], at);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], k(i, j));
  }
  return from_triplets(mesh.num_vertices(), trip);
}

MassMatrices assemble_masses(const Mesh2D& mesh, const ScalarField& q, BoundaryTag tag) {
  Triplets vol;
  vol.reserve(size_t(9) * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.signed_area(t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) vol.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
  }

  // 2-point Gauss on each edge.
  const double g = 0.5 / std::sqrt(3.0);
  const double s[2] = {0.5 - g, 0.5 + g};
  Triplets bnd;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const Point& a = mesh.vertices[e.v[0]];
    const Point& b = mesh.vertices[e.v[1]];
    const double half = 0.5 * (b - a).norm();
    double m00 = 0, m01 = 0, m11 = 0;
    for (double t : s) {
      const double qv = q(a + t * (b - a));
      m00 += half * qv * (1 - t) * (1 - t);
      m01 += half * qv * (1 - t) * t;
      m11 += half * qv * t * t;
    }
    bnd.emplace_back(e.v[0], e.v[0], m00);
    bnd.emplace_back(e.v[0], e.v[1], m01);
    bnd.emplace_back(e.v[1], e.v[0], m01);
    bnd.emplace_back(e.v[1], e.v[1], m11);
  }
  return {from_triplets(mesh.num_vertices(), vol), from_triplets(mesh.num_vertices(), bnd)};
}

SparseMatrix assemble_weighted_mass(const Mesh2D& mesh, const ScalarField& w) {
  Triplets trip;
  trip.reserve(size_t(9) * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point& p0 = mesh.vertices[tri[0]];
    const Point& p1 = mesh.vertices[tri[1]];
    const Point& p2 = mesh.vertices[tri[2]];
    const double area = mesh.signed_area(t);
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    for (const auto& qp : kDegree4) {
      const Eigen::Vector3d phi(qp.l0, qp.l1, qp.l2);
      const double wv = qp.w * area * w(qp.l0 * p0 + qp.l1 * p1 + qp.l2 * p2);
      for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) m(i, j) += wv * phi(i) * phi(j);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], i <= j ? m(i, j) : m(j, i));
  }
  return from_triplets(mesh.num_vertices(), trip);
}

Vector lumped_mass(const Mesh2D& mesh) {
  Vector w = Vector::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double third = mesh.signed_area(t) / 3.0;
    for (int v : mesh.triangles[t]) w[v] += third;
  }
  return w;
}

double symmetry_defect(const SparseMatrix& a) {
  const SparseMatrix at = a.transpose();
  return (a - at).norm();
}

void write_matrix(std::ostream& os, const SparseMatrix& a) {
  os.precision(17);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

Reduction::Reduction(std::vector<int> index, int reduced) : index_(std::move(index)), reduced_(reduced) {
  Triplets trip;
  for (int i = 0; i < full_size(); ++i)
    if (index_[i] >= 0) trip.emplace_back(i, index_[i], 1.0);
  prolongation_.resize(full_size(), reduced_);
  prolongation_.setFromTriplets(trip.begin(), trip.end());
}

Reduction Reduction::identity(int n) {
  std::vector<int> index(n);
  for (int i = 0; i < n; ++i) index[i] = i;
  return Reduction(std::move(index), n);
}

Reduction Reduction::dirichlet(int n, const std::vector<int>& fixed) {
  std::vector<char> drop(n, 0);
  for (int v : fixed) {
    if (v < 0 || v >= n) throw ConstraintError("Dirichlet index out of range");
    drop[v] = 1;
  }
  std::vector<int> index(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i)
    if (!drop[i]) index[i] = next++;
  return Reduction(std::move(index), next);
}

Reduction Reduction::dirichlet(const Mesh2D& mesh, const std::vector<BoundaryTag>& tags) {
  std::vector<int> fixed;
  for (BoundaryTag tag : tags) {
    const auto v = mesh.vertices_with_tag(tag);
    fixed.insert(fixed.end(), v.begin(), v.end());
  }
  return dirichlet(mesh.num_vertices(), fixed);
}

Reduction Reduction::periodic(int n, const std::map<int, int>& pairs) {
  for (const auto& [slave, master] : pairs) {
    if (slave < 0 || slave >= n || master < 0 || master >= n)
      throw ConstraintError("periodic pair index out of range");
    if (slave == master) throw ConstraintError("periodic pair maps a vertex onto itself");
  }
  std::vector<int> root(n);
  for (int i = 0; i < n; ++i) {
    int r = i;
    int steps = 0;
    for (auto it = pairs.find(r); it != pairs.end(); it = pairs.find(r)) {
      r = it->second;
      if (++steps > static_cast<int>(pairs.size())) throw ConstraintError("periodic pairing contains a cycle");
    }
    root[i] = r;
  }
  std::vector<int> index(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i)
    if (!pairs.count(i)) index[i] = next++;
  for (int i = 0; i < n; ++i) index[i] = index[root[i]];
  return Reduction(std::move(index), next);
}

SparseMatrix Reduction::reduce(const SparseMatrix& a) const {
  if (a.rows() != full_size() || a.cols() != full_size()) throw ConstraintError("reduction: dimension mismatch");
  SparseMatrix r = SparseMatrix(prolongation_.transpose()) * a * prolongation_;
  // Symmetrize exactly: P^T A P is symmetric in exact arithmetic only.
  SparseMatrix rt = r.transpose();
  r = 0.5 * (r + rt);
  r.makeCompressed();
  return r;
}

Vector Reduction::reduce(const Vector& b) const {
  if (b.size() != full_size()) throw ConstraintError("reduction: dimension mismatch");
  return prolongation_.transpose() * b;
}

Vector Reduction::restrict(const Vector& full) const {
  Vector r = Vector::Zero(reduced_);
  for (int i = 0; i < full_size(); ++i)
    if (index_[i] >= 0) r[index_[i]] = full[i];
  return r;
}

Vector Reduction::scatter(const Vector& reduced) const { return prolongation_ * reduced; }

Eigen::MatrixXd Reduction::scatter(const Eigen::MatrixXd& reduced) const { return prolongation_ * reduced; }

SparseMatrix append_mean_zero(const SparseMatrix& k, const Vector& weights) {
  const int n = static_cast<int>(k.rows());
  if (weights.size() != n) throw ConstraintError("mean-zero weights: dimension mismatch");
  Triplets trip;
  trip.reserve(k.nonZeros() + 2 * n);
  for (int c = 0; c < k.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(k, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, n, weights[i]);
    trip.emplace_back(n, i, weights[i]);
  }
  return from_triplets(n + 1, trip);
}

}  // namespace specloc
