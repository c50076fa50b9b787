#include "specloc/effective.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "specloc/error.hpp"
#include "specloc/fem.hpp"
#include "specloc/format.hpp"

namespace specloc {

namespace {

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& m, double power) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd d = es.eigenvalues().array().pow(power);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double label_mu(const Eigen::VectorXd& root_kappa, const std::vector<int>& n) {
  double mu = 0.0;
  for (int i = 0; i < root_kappa.size(); ++i) mu += (2 * n[i] + 1) * root_kappa[i];
  return mu;
}

}  // namespace

void OscillatorSpec::validate() const {
  if (a.rows() != q.rows() || a.cols() != q.cols()) throw HypothesisError("A and Q must have the same dimension");
  if (!is_spd(a)) throw HypothesisError("effective tensor A is not symmetric positive definite");
  if (!is_spd(q)) throw HypothesisError("potential matrix Q is not symmetric positive definite");
  if (!(kappa0 > 0.0)) throw HypothesisError("kappa0 must be positive");
}

OscillatorSpec build_oscillator(const Eigen::Matrix2d& a_eff, const Measures& cell, const PotentialField& q) {
  if (!(cell.area > 0.0) || !(cell.surface > 0.0))
    throw HypothesisError("cell must have positive area and hole perimeter");
  q.validate();
  const double ratio = cell.surface / cell.area;
  OscillatorSpec spec;
  spec.a = a_eff;
  spec.q = 0.5 * ratio * q.hessian;
  spec.kappa0 = ratio * q.q0;
  spec.validate();
  return spec;
}

OscillatorFrame oscillator_frame(const OscillatorSpec& spec) {
  spec.validate();
  const Eigen::MatrixXd root = sqrt_spd(spec.a, 0.5);
  Eigen::MatrixXd c = root * spec.q * root;
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  OscillatorFrame f;
  f.kappa = es.eigenvalues();
  f.s = es.eigenvectors();
  f.a_inv_sqrt = sqrt_spd(spec.a, -0.5);
  f.det_a = spec.a.determinant();
  return f;
}

std::vector<double> SpectrumList::values() const {
  std::vector<double> v;
  for (const auto& e : entries) v.push_back(e.mu);
  return v;
}

std::vector<Cluster> detect_clusters(const std::vector<double>& values, double tol) {
  std::vector<Cluster> out;
  for (size_t i = 0; i < values.size(); ++i) {
    const bool joins = !out.empty() && values[i] - values[i - 1] <= tol * std::max(1.0, std::abs(values[i]));
    if (joins) {
      ++out.back().size;
    } else {
      out.push_back(Cluster{static_cast<int>(i) + 1, 1, values[i]});
    }
  }
  return out;
}

SpectrumList analytic_spectrum(const OscillatorSpec& spec, int count, double gap_tol) {
  if (count < 1) throw DimensionError("spectrum count must be positive");
  const OscillatorFrame f = oscillator_frame(spec);
  const int d = spec.dim();
  const Eigen::VectorXd root = f.kappa.array().sqrt();

  // The first `count` labels along kappa_1 bound the wanted values.
  const double bound = (2 * (count - 1) + 1) * root[0] + (root.sum() - root[0]);
  const double limit = bound + 2.0 * gap_tol * std::max(1.0, bound);

  std::vector<SpectrumEntry> all;
  std::vector<int> n(d, 0);
  std::function<void(int, double)> walk = [&](int i, double partial) {
    if (i == d) {
      all.push_back(SpectrumEntry{label_mu(root, n), n, 0});
      return;
    }
    double rest = 0.0;
    for (int j = i + 1; j < d; ++j) rest += root[j];
    for (n[i] = 0; partial + (2 * n[i] + 1) * root[i] + rest <= limit; ++n[i]) walk(i + 1, partial + (2 * n[i] + 1) * root[i]);
    n[i] = 0;
  };
  walk(0, 0.0);
  std::sort(all.begin(), all.end(), [](const SpectrumEntry& x, const SpectrumEntry& y) {
    return x.mu != y.mu ? x.mu < y.mu : x.labels > y.labels;
  });

  std::vector<double> values;
  for (const auto& e : all) values.push_back(e.mu);
  const std::vector<Cluster> clusters = detect_clusters(values, gap_tol);

  SpectrumList out;
  out.entries.assign(all.begin(), all.begin() + count);
  for (size_t c = 0; c < clusters.size() && clusters[c].first <= count; ++c) {
    out.clusters.push_back(clusters[c]);
    for (int i = clusters[c].first; i < clusters[c].first + clusters[c].size && i <= count; ++i)
      out.entries[i - 1].cluster = static_cast<int>(c) + 1;
  }
  return out;
}

Eigen::VectorXd hermite_functions(int n, double t) {
  Eigen::VectorXd psi(n + 1);
  psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * t * t);
  if (n >= 1) psi[1] = std::sqrt(2.0) * t * psi[0];
  for (int k = 1; k < n; ++k)
    psi[k + 1] = std::sqrt(2.0 / (k + 1)) * t * psi[k] - std::sqrt(double(k) / (k + 1)) * psi[k - 1];
  return psi;
}

double eigenfunction_eval(const OscillatorFrame& f, const std::vector<int>& labels, const Eigen::VectorXd& z,
                          Eigen::VectorXd* gradient) {
  const int d = static_cast<int>(f.kappa.size());
  if (static_cast<int>(labels.size()) != d || z.size() != d) throw DimensionError("label or point dimension mismatch");
  const Eigen::VectorXd w = f.s.transpose() * (f.a_inv_sqrt * z);
  Eigen::VectorXd factor(d), dfactor(d);
  double scale = std::pow(f.det_a, -0.25);
  for (int i = 0; i < d; ++i) {
    const double r = std::pow(f.kappa[i], 0.25);
    const int n = labels[i];
    const Eigen::VectorXd psi = hermite_functions(n + 1, r * w[i]);
    scale *= std::pow(f.kappa[i], 0.125);
    factor[i] = psi[n];
    const double below = n > 0 ? std::sqrt(0.5 * n) * psi[n - 1] : 0.0;
    dfactor[i] = r * (below - std::sqrt(0.5 * (n + 1)) * psi[n + 1]);
  }
  const double value = scale * factor.prod();
  if (gradient) {
    Eigen::VectorXd gw(d);
    for (int i = 0; i < d; ++i) {
      double p = scale * dfactor[i];
      for (int j = 0; j < d; ++j)
        if (j != i) p *= factor[j];
      gw[i] = p;
    }
    *gradient = f.a_inv_sqrt * (f.s * gw);
  }
  return value;
}

double eigenfunction_eval(const OscillatorSpec& spec, const std::vector<int>& labels, const Eigen::VectorXd& z) {
  return eigenfunction_eval(oscillator_frame(spec), labels, z, nullptr);
}

double default_box(const OscillatorSpec& spec) {
  const OscillatorFrame f = oscillator_frame(spec);
  return 8.0 / std::pow(f.kappa.minCoeff(), 0.25);
}

SpectrumList numeric_oscillator(const OscillatorSpec& spec, double box, double h, int k, double gap_tol,
                                const EigenOptions& opt) {
  spec.validate();
  if (spec.dim() != 2) throw DimensionError("numeric oscillator is implemented for d = 2");
  if (box <= 0.0) box = default_box(spec);
  if (!(h > 0.0) || h >= box) throw ConfigurationError("oscillator grid step must lie in (0, box)");
  const int cells = static_cast<int>(std::ceil(2.0 * box / h - 1e-9));
  const Mesh2D mesh = build_rectangle_mesh(Point(-box, -box), Point(box, box), cells, cells);

  const Eigen::Matrix2d a = spec.a;
  const Eigen::Matrix2d q = spec.q;
  const SparseMatrix stiffness = assemble_stiffness(mesh, DiffusionCoefficient::constant(a), 1.0);
  const Vector lumped = lumped_mass(mesh);
  Vector potential(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point& z = mesh.vertices[v];
    potential[v] = lumped[v] * z.dot(q * z);
  }
  const SparseMatrix vmat = SparseMatrix(potential.asDiagonal());
  const SparseMatrix mmat = SparseMatrix(lumped.asDiagonal());
  const Reduction red = Reduction::dirichlet(mesh, {BoundaryTag::DirichletOuter});
  const auto pairs = smallest_eigenpairs(red.reduce(SparseMatrix(stiffness + vmat)), red.reduce(mmat), k, opt);

  SpectrumList out;
  std::vector<double> values;
  for (const auto& p : pairs) values.push_back(p.value);
  out.clusters = detect_clusters(values, gap_tol);
  for (size_t c = 0; c < out.clusters.size(); ++c)
    for (int i = 0; i < out.clusters[c].size; ++i)
      out.entries.push_back(SpectrumEntry{values[out.clusters[c].first - 1 + i], {}, static_cast<int>(c) + 1});
  return out;
}

void write_spectrum_csv(std::ostream& os, const SpectrumList& analytic, const SpectrumList* numeric) {
  os << "index,mu,n1,n2,multiplicity_cluster";
  if (numeric) os << ",mu_numeric";
  os << '\n';
  for (size_t i = 0; i < analytic.entries.size(); ++i) {
    const auto& e = analytic.entries[i];
    os << i + 1 << ',' << format_number(e.mu) << ',' << (e.labels.size() > 0 ? e.labels[0] : 0) << ','
       << (e.labels.size() > 1 ? e.labels[1] : 0) << ',' << analytic.multiplicity(static_cast<int>(i));
    if (numeric) {
      os << ',';
      if (i < numeric->entries.size()) os << format_number(numeric->entries[i].mu);
    }
    os << '\n';
  }
}

}  // namespace specloc
