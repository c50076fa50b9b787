#include "specloc/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>

#include "specloc/error.hpp"

namespace specloc {

namespace {

// Largest-magnitude entry positive, for reproducible signs.
void fix_sign(Vector& u) {
  Eigen::Index i = 0;
  u.cwiseAbs().maxCoeff(&i);
  if (u[i] < 0.0) u = -u;
}

}  // namespace

FullSolveResult solve_full(const DomainSpec& spec, const CoefficientField& coeffs, int k, const FullSolveOptions& opt) {
  spec.cell.validate();
  coeffs.a.validate();
  coeffs.q.validate();
  auto mesh = std::make_shared<const Mesh2D>(build_perforated_mesh(spec));

  FullSolveResult r;
  r.epsilon = spec.epsilon;
  r.half_width = spec.half_width;
  r.mesh = mesh;
  r.cell = measures(build_cell_mesh(spec.cell));
  r.kappa0 = r.cell.surface / r.cell.area * coeffs.q(Point::Zero());

  const Point origin(-spec.half_width, -spec.half_width);
  const SparseMatrix stiffness = assemble_stiffness(*mesh, coeffs.a, spec.epsilon, origin);
  const PotentialField& q = coeffs.q;
  MassMatrices masses = assemble_masses(*mesh, [&q](const Point& x) { return q(x); }, BoundaryTag::Hole);
  r.mass = masses.volume;

  SparseMatrix a = stiffness;
  std::vector<BoundaryTag> fixed{BoundaryTag::DirichletOuter};
  EigenOptions eig = opt.eigen;
  eig.lowest = true;
  switch (opt.holes) {
    case HoleCondition::Robin:
      a += masses.boundary;
      eig.shift = opt.shift_factor * r.kappa0 / spec.epsilon;
      break;
    case HoleCondition::Neumann:
      eig.shift = 0.0;
      break;
    case HoleCondition::Dirichlet:
      fixed.push_back(BoundaryTag::Hole);
      eig.shift = 0.0;
      break;
  }
  r.shift = eig.shift;
  const Reduction red = Reduction::dirichlet(*mesh, fixed);
  r.unknowns = red.reduced_size();

  std::vector<EigenPair> pairs;
  try {
    pairs = smallest_eigenpairs(red.reduce(a), red.reduce(masses.volume), k, eig);
  } catch (const ConvergenceError& e) {
    std::ostringstream os;
    os << "eps = " << spec.epsilon << ": " << e.what();
    throw SolverError(os.str());
  } catch (const FactorizationError& e) {
    std::ostringstream os;
    os << "eps = " << spec.epsilon << ": " << e.what();
    throw SolverError(os.str());
  }
  for (auto& p : pairs) {
    Vector u = red.scatter(p.vector);
    u /= std::sqrt(u.dot(r.mass * u));
    fix_sign(u);
    r.values.push_back(p.value);
    r.vectors.push_back(std::move(u));
    r.residuals.push_back(p.residual);
  }
  return r;
}

double extract_mu(double lambda, double eps, double kappa0) { return std::sqrt(eps) * (lambda - kappa0 / eps); }

double localization_mass(const Mesh2D& mesh, const Vector& u, double gamma) {
  double outside = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    if (mesh.centroid(t).norm() <= gamma) continue;
    const auto& tri = mesh.triangles[t];
    const double a = u[tri[0]], b = u[tri[1]], c = u[tri[2]];
    const double sum = a + b + c;
    outside += mesh.signed_area(t) / 12.0 * (a * a + b * b + c * c + sum * sum);
  }
  return outside;
}

double localization_mass(const FullSolveResult& result, int j, double gamma) {
  return localization_mass(*result.mesh, result.vectors.at(j), gamma);
}

SandwichSlack sandwich_check(double lambda1, double eps, double kappa0) {
  SandwichSlack s;
  s.mu1 = extract_mu(lambda1, eps, kappa0);
  s.lower = lambda1 - kappa0 / eps;
  s.flag = !(s.mu1 > 0.0);
  return s;
}

SandwichSlack sandwich_check(const FullSolveResult& result) {
  return sandwich_check(result.values.at(0), result.epsilon, result.kappa0);
}

SweepBounds sweep_bounds(const std::vector<double>& mu1, double max_ratio) {
  SweepBounds b;
  if (mu1.empty()) {
    b.flag = true;
    return b;
  }
  b.lower = *std::min_element(mu1.begin(), mu1.end());
  b.upper = *std::max_element(mu1.begin(), mu1.end());
  b.ratio = b.lower > 0.0 ? b.upper / b.lower : std::numeric_limits<double>::infinity();
  b.flag = !(b.lower > 0.0) || !(b.ratio <= max_ratio);
  return b;
}

Mesh2D rescaled_mesh(const Mesh2D& mesh, double eps) {
  Mesh2D z = mesh;
  const double s = std::pow(eps, -0.25);
  for (auto& v : z.vertices) v *= s;
  return z;
}

RescaledField rescale_eigenfunction(const FullSolveResult& result, int j) {
  RescaledField f;
  auto z = std::make_shared<const Mesh2D>(rescaled_mesh(*result.mesh, result.epsilon));
  const SparseMatrix m = assemble_masses(*z, [](const Point&) { return 0.0; }, BoundaryTag::Hole).volume;
  f.values = result.vectors.at(j);
  f.values /= std::sqrt(f.values.dot(m * f.values));
  f.mesh = z;
  return f;
}

SparseMatrix q_norm_matrix(const Mesh2D& z_mesh, const DiffusionCoefficient& a, const Eigen::MatrixXd& q, double eps,
                           double half_width) {
  const double s = std::pow(eps, 0.25);
  const Point origin = Point(-half_width, -half_width) / s;
  const Eigen::Matrix2d qq = q;
  const SparseMatrix k = assemble_stiffness(z_mesh, a, eps / s, origin);
  const SparseMatrix w = assemble_weighted_mass(z_mesh, [&qq](const Point& z) { return z.dot(qq * z); });
  return k + w;
}

Eigen::MatrixXd ansatz_vectors(const Mesh2D& z_mesh, const OscillatorFrame& frame,
                               const std::vector<std::vector<int>>& labels, const CorrectorSet& correctors, double eps,
                               double half_width) {
  const double s = std::pow(eps, 0.25);
  const double corr_scale = eps / s;  // eps^{3/4}
  const Point origin = Point(-half_width, -half_width) / s;
  Eigen::MatrixXd out(z_mesh.num_vertices(), static_cast<int>(labels.size()));
  for (int v = 0; v < z_mesh.num_vertices(); ++v) {
    const Point& z = z_mesh.vertices[v];
    const CorrectorSample n = corrector_eval(correctors, z, corr_scale, origin);
    for (size_t c = 0; c < labels.size(); ++c) {
      Eigen::VectorXd grad;
      const double value = eigenfunction_eval(frame, labels[c], z, &grad);
      out(v, static_cast<int>(c)) = n.in_hole ? value : value + corr_scale * n.value.dot(grad);
    }
  }
  return out;
}

ProcrustesResult procrustes(const SparseMatrix& g, const Eigen::MatrixXd& discrete, const Eigen::MatrixXd& ansatz,
                            double norm_scale) {
  if (discrete.rows() != ansatz.rows() || discrete.rows() != g.rows())
    throw DimensionError("procrustes: row dimensions differ");
  const Eigen::MatrixXd gv = g * discrete;
  const Eigen::MatrixXd c = ansatz.transpose() * gv;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ProcrustesResult r;
  r.beta = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixXd diff = discrete - ansatz * r.beta;
  const Eigen::MatrixXd gd = g * diff;
  for (int p = 0; p < diff.cols(); ++p) {
    const double e = std::sqrt(std::max(0.0, diff.col(p).dot(gd.col(p)))) / norm_scale;
    r.errors.push_back(e);
    r.max_error = std::max(r.max_error, e);
  }
  return r;
}

ClusterResolution resolve_cluster(const std::vector<double>& values, int first, int size) {
  ClusterResolution r;
  const int last = first + size - 1;
  if (first < 0 || size < 1 || last + 1 >= static_cast<int>(values.size())) return r;  // upper neighbour unknown
  r.spread = values[last] - values[first];
  r.gap = values[last + 1] - values[last];
  if (first > 0) r.gap = std::min(r.gap, values[first] - values[first - 1]);
  r.resolved = r.spread < r.gap;
  return r;
}

AnsatzReport ansatz_error(const FullSolveResult& result, const SpectrumList& effective, int cluster,
                          const CorrectorSet& correctors, const OscillatorSpec& spec) {
  if (cluster < 1 || cluster > static_cast<int>(effective.clusters.size()))
    throw DimensionError("effective cluster index out of range");
  const Cluster& cl = effective.clusters[cluster - 1];
  const int first = cl.first - 1;
  if (first + cl.size > static_cast<int>(effective.entries.size()))
    throw DimensionError("effective spectrum truncates the cluster");
  if (first + cl.size > static_cast<int>(result.vectors.size()))
    throw DimensionError("not enough discrete eigenpairs for the cluster");

  AnsatzReport report;
  report.resolution = resolve_cluster(result.values, first, cl.size);

  const double eps = result.epsilon;
  const Mesh2D z_mesh = rescaled_mesh(*result.mesh, eps);
  const SparseMatrix g = q_norm_matrix(z_mesh, correctors.a, spec.q, eps, result.half_width);
  std::vector<std::vector<int>> labels;
  for (int i = 0; i < cl.size; ++i) labels.push_back(effective.entries[first + i].labels);
  const Eigen::MatrixXd w =
      ansatz_vectors(z_mesh, oscillator_frame(spec), labels, correctors, eps, result.half_width);

  Eigen::MatrixXd v(z_mesh.num_vertices(), cl.size);
  const double to_z = std::pow(eps, 0.25) * std::sqrt(result.cell.area);
  for (int i = 0; i < cl.size; ++i) v.col(i) = to_z * result.vectors[first + i];
  report.fit = procrustes(g, v, w, std::sqrt(cl.mu));
  return report;
}

TraceCheck trace_identity_check(const Mesh2D& mesh, const Vector& w, double kappa_ratio, double eps) {
  const MassMatrices m = assemble_masses(mesh, [](const Point&) { return 1.0; }, BoundaryTag::Hole);
  const SparseMatrix k = assemble_stiffness(mesh, DiffusionCoefficient::identity(), 1.0);
  const double vol = w.dot(m.volume * w);
  const double surf = w.dot(m.boundary * w);
  TraceCheck t;
  t.gap = std::abs(kappa_ratio / eps * vol - surf);
  t.bound = std::sqrt(vol) * std::sqrt(std::max(0.0, w.dot(k * w)));
  return t;
}

}  // namespace specloc
