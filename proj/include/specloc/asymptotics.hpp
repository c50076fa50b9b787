#pragma once

#include <memory>
#include <vector>

#include "specloc/cell_problem.hpp"
#include "specloc/effective.hpp"
#include "specloc/eigensolve.hpp"

namespace specloc {

/// Boundary condition on the hole boundaries. Neumann drops the boundary mass,
/// Dirichlet eliminates the hole vertices; both bracket the Robin spectrum.
enum class HoleCondition { Robin, Neumann, Dirichlet };

struct FullSolveOptions {
  HoleCondition holes = HoleCondition::Robin;
  EigenOptions eigen;
  /// Robin shift = shift_factor * kappa_min / epsilon.
  double shift_factor = 0.9;
};

struct FullSolveResult {
  double epsilon = 0.0;
  double half_width = 1.0;
  /// (|Sigma|/|Y|) q(0) from the discrete cell measures.
  double kappa0 = 0.0;
  Measures cell;
  std::shared_ptr<const Mesh2D> mesh;
  SparseMatrix mass;  // full volume mass matrix
  std::vector<double> values;
  std::vector<Vector> vectors;  // full vertex vectors, zero on eliminated vertices, u^T M u = 1
  std::vector<double> residuals;
  int unknowns = 0;
  double shift = 0.0;
};

FullSolveResult solve_full(const DomainSpec& spec, const CoefficientField& coeffs, int k,
                           const FullSolveOptions& opt = {});

/// sqrt(eps) (lambda - kappa0 / eps)
double extract_mu(double lambda, double eps, double kappa0);

/// int over triangles with centroid outside B_gamma(0) of u^2 (exact P1 element mass).
double localization_mass(const Mesh2D& mesh, const Vector& u, double gamma);
double localization_mass(const FullSolveResult& result, int j, double gamma);

struct SandwichSlack {
  double mu1 = 0.0;
  double lower = 0.0;  // lambda_1 - kappa0 / eps
  bool flag = false;   // mu1 <= 0
};

SandwichSlack sandwich_check(double lambda1, double eps, double kappa0);
SandwichSlack sandwich_check(const FullSolveResult& result);

struct SweepBounds {
  double lower = 0.0;  // min mu_1
  double upper = 0.0;  // max mu_1
  double ratio = 0.0;
  bool flag = false;   // nonpositive value or ratio above the limit
};

SweepBounds sweep_bounds(const std::vector<double>& mu1, double max_ratio = 3.0);

struct RescaledField {
  std::shared_ptr<const Mesh2D> mesh;  // vertices z = x / eps^{1/4}
  Vector values;                       // unit discrete L^2(dz) norm
};

RescaledField rescale_eigenfunction(const FullSolveResult& result, int j);

/// Vertex copy of the mesh with coordinates divided by eps^{1/4}.
Mesh2D rescaled_mesh(const Mesh2D& mesh, double eps);

/// Gram matrix of ||.||_{eps,Q}: int a(x/eps) grad u.grad w dz + int (z^T Q z) u w dz
/// on the rescaled mesh of a perforated domain with origin (-L, -L).
SparseMatrix q_norm_matrix(const Mesh2D& z_mesh, const DiffusionCoefficient& a, const Eigen::MatrixXd& q,
                           double eps, double half_width);

/// Nodal ansatz v_k(z) + eps^{3/4} N(x/eps) . grad v_k(z), one column per label set.
Eigen::MatrixXd ansatz_vectors(const Mesh2D& z_mesh, const OscillatorFrame& frame,
                               const std::vector<std::vector<int>>& labels, const CorrectorSet& correctors,
                               double eps, double half_width);

struct ProcrustesResult {
  Eigen::MatrixXd beta;        // orthogonal, ansatz -> discrete mixing
  std::vector<double> errors;  // per discrete column, divided by norm_scale
  double max_error = 0.0;
};

/// Best orthogonal beta minimizing ||V - W beta||_G, from the SVD of W^T G V.
ProcrustesResult procrustes(const SparseMatrix& g, const Eigen::MatrixXd& discrete, const Eigen::MatrixXd& ansatz,
                            double norm_scale = 1.0);

struct ClusterResolution {
  bool resolved = false;
  double spread = 0.0;  // within the cluster
  double gap = 0.0;     // to the nearest discrete neighbour
};

/// Whether discrete values first..first+size-1 (0-based) form an isolated group.
ClusterResolution resolve_cluster(const std::vector<double>& values, int first, int size);

struct AnsatzReport {
  ClusterResolution resolution;
  ProcrustesResult fit;
};

/// Compares the discrete cluster first..first+size-1 (0-based) against the
/// ansatz built from the effective labels of the same cluster. Discrete vectors
/// are rescaled to z, normalized to |Y| in L^2 (the effective normalization
/// restricted to the perforated set), and errors are divided by sqrt(mu).
AnsatzReport ansatz_error(const FullSolveResult& result, const SpectrumList& effective, int cluster,
                          const CorrectorSet& correctors, const OscillatorSpec& spec);

struct TraceCheck {
  double gap = 0.0;    // |eps^{-1} (|Sigma|/|Y|) int w^2 - int_Sigma w^2|
  double bound = 0.0;  // ||w|| ||grad w||
  double ratio() const { return bound > 0.0 ? gap / bound : 0.0; }
};

TraceCheck trace_identity_check(const Mesh2D& mesh, const Vector& w, double kappa_ratio, double eps);

}  // namespace specloc
