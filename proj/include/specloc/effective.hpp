#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "specloc/coefficients.hpp"
#include "specloc/eigensolve.hpp"
#include "specloc/geometry.hpp"

namespace specloc {

/// -div(A grad v) + (z^T Q z) v = mu v on R^d, with the leading constant kappa0.
struct OscillatorSpec {
  Eigen::MatrixXd a;
  Eigen::MatrixXd q;
  double kappa0 = 0.0;

  int dim() const { return static_cast<int>(a.rows()); }
  /// Throws HypothesisError unless A and Q are SPD and kappa0 > 0.
  void validate() const;
};

/// Q = (|Sigma|/|Y|) H / 2 and kappa0 = (|Sigma|/|Y|) q(0) from discrete cell measures.
OscillatorSpec build_oscillator(const Eigen::Matrix2d& a_eff, const Measures& cell, const PotentialField& q);

/// Simultaneous diagonalization: z = A^{1/2} S w turns the operator into
/// sum_i (-d^2/dw_i^2 + kappa_i w_i^2), kappa ascending.
struct OscillatorFrame {
  Eigen::VectorXd kappa;
  Eigen::MatrixXd s;           // orthogonal, columns are eigenvectors of A^{1/2} Q A^{1/2}
  Eigen::MatrixXd a_inv_sqrt;  // A^{-1/2}
  double det_a = 1.0;
};

OscillatorFrame oscillator_frame(const OscillatorSpec& spec);

struct SpectrumEntry {
  double mu = 0.0;
  std::vector<int> labels;  // Hermite indices along kappa_1, kappa_2, ...; empty for numeric spectra
  int cluster = 0;          // 1-based index of the multiplicity cluster
};

struct Cluster {
  int first = 0;  // 1-based index J(j) of the first member
  int size = 0;   // multiplicity kappa_j
  double mu = 0.0;
};

struct SpectrumList {
  std::vector<SpectrumEntry> entries;
  std::vector<Cluster> clusters;

  std::vector<double> values() const;
  int multiplicity(int index) const { return clusters[entries[index].cluster - 1].size; }
};

/// Groups neighbouring values whose gap is at most tol * max(1, |mu|).
std::vector<Cluster> detect_clusters(const std::vector<double>& values, double tol);

/// First `count` values of sum_i (2 n_i + 1) sqrt(kappa_i) with their labels.
/// Clusters are formed from the full label degeneracy, so a cluster cut by
/// `count` still reports its true multiplicity.
SpectrumList analytic_spectrum(const OscillatorSpec& spec, int count, double gap_tol = 1e-3);

/// L^2(R^d)-normalized eigenfunction with the given labels; d <= 2.
double eigenfunction_eval(const OscillatorSpec& spec, const std::vector<int>& labels, const Eigen::VectorXd& z);
/// Same, with the analytic gradient in z.
double eigenfunction_eval(const OscillatorFrame& frame, const std::vector<int>& labels, const Eigen::VectorXd& z,
                          Eigen::VectorXd* gradient);

/// Orthonormal Hermite functions psi_0..psi_n at t.
Eigen::VectorXd hermite_functions(int n, double t);

/// Default truncation box half-width 8 / kappa_min^{1/4}.
double default_box(const OscillatorSpec& spec);

/// P1 discretization with lumped mass on a structured mesh of [-L, L]^2 and
/// zero boundary values; d = 2 only. box <= 0 selects default_box().
SpectrumList numeric_oscillator(const OscillatorSpec& spec, double box, double h, int k, double gap_tol = 1e-3,
                                const EigenOptions& opt = {});

/// index,mu,n1,n2,multiplicity_cluster[,mu_numeric]
void write_spectrum_csv(std::ostream& os, const SpectrumList& analytic, const SpectrumList* numeric = nullptr);

}  // namespace specloc
