#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "specloc/coefficients.hpp"
#include "specloc/geometry.hpp"

namespace specloc {

/// Symmetric sparse matrix in full (both triangles) column-major storage.
/// Assembly writes (i,j) and (j,i) from the same value, so symmetry is exact.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;
using ScalarField = std::function<double(const Point&)>;

/// P1 element stiffness for a constant matrix a on the triangle (p0, p1, p2).
Eigen::Matrix3d element_stiffness(const Point& p0, const Point& p1, const Point& p2,
                                  const Eigen::Matrix2d& a);

/// Gradients of the three P1 basis functions on a triangle (columns).
Eigen::Matrix<double, 2, 3> basis_gradients(const Point& p0, const Point& p1, const Point& p2);

/// K_ij = sum_T |T| a((c_T - origin)/scale) grad phi_i . grad phi_j, a sampled at centroids.
SparseMatrix assemble_stiffness(const Mesh2D& mesh, const DiffusionCoefficient& a, double scale,
                                const Point& origin = Point::Zero());

struct MassMatrices {
  SparseMatrix volume;    // exact P1 mass
  SparseMatrix boundary;  // q-weighted mass on tagged edges, 2-point Gauss
};

MassMatrices assemble_masses(const Mesh2D& mesh, const ScalarField& q, BoundaryTag tag);

/// int w phi_i phi_j with a degree-4 triangle rule (exact for quadratic w).
SparseMatrix assemble_weighted_mass(const Mesh2D& mesh, const ScalarField& w);

/// int phi_i over the mesh (row sums of the P1 mass matrix).
Vector lumped_mass(const Mesh2D& mesh);

double symmetry_defect(const SparseMatrix& a);

/// Coordinate text dump: one "i j value" line per stored entry.
void write_matrix(std::ostream& os, const SparseMatrix& a);

/// Linear restriction of vertex unknowns to a reduced set: either Dirichlet
/// elimination or periodic identification. reduce() forms P^T A P, scatter()
/// maps reduced vectors back to full vertex vectors.
class Reduction {
 public:
  static Reduction identity(int n);
  static Reduction dirichlet(int n, const std::vector<int>& fixed);
  static Reduction dirichlet(const Mesh2D& mesh, const std::vector<BoundaryTag>& tags);
  /// Merges each slave into its master; chains are followed. Throws
  /// ConstraintError on out-of-range indices or cyclic pairings.
  static Reduction periodic(int n, const std::map<int, int>& pairs);

  int full_size() const { return static_cast<int>(index_.size()); }
  int reduced_size() const { return reduced_; }
  /// full index -> reduced index, or -1 for eliminated unknowns.
  const std::vector<int>& index_map() const { return index_; }

  SparseMatrix reduce(const SparseMatrix& a) const;
  Vector reduce(const Vector& b) const;
  Vector restrict(const Vector& full) const;
  Vector scatter(const Vector& reduced) const;
  Eigen::MatrixXd scatter(const Eigen::MatrixXd& reduced) const;

 private:
  Reduction(std::vector<int> index, int reduced);
  std::vector<int> index_;
  int reduced_ = 0;
  SparseMatrix prolongation_;
};

/// Saddle-point matrix [[K, w], [w^T, 0]] enforcing sum_i w_i u_i = 0.
SparseMatrix append_mean_zero(const SparseMatrix& k, const Vector& weights);

}  // namespace specloc
