#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "specloc/asymptotics.hpp"

namespace specloc {

struct PowerFit {
  int j = 0;
  bool fitted = false;  // false when fewer than 3 clean points
  double rate = 0.0;
  double constant = 0.0;
  double r2 = 0.0;
  int points = 0;
  bool convergent = false;  // rate above 0.05
};

/// Least squares of log y = log C + rate log x. Points with y <= 0 are dropped.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct StudyConfig {
  double half_width = 1.0;
  std::vector<double> epsilons{0.5, 1.0 / 3.0, 0.25, 1.0 / 6.0, 0.125};
  CellGeometry cell;
  CoefficientField coeffs;
  std::vector<int> js{1};  // 1-based eigenvalue indices
  int k = 6;
  double gamma = 0.5;
  EigenOptions eigen;
  int jobs = 1;
};

struct StudyRow {
  double eps = 0.0;
  int j = 0;
  bool ok = false;
  std::string error;
  double lambda = 0.0;
  double mu_eps = 0.0;
  double mu_eff = 0.0;
  double abs_err = 0.0;
  double loc_mass = 0.0;
  double ansatz_err = 0.0;
  bool cluster_resolved = false;
  bool sandwich_flag = false;
};

struct StudyReport {
  Eigen::Matrix2d a_eff = Eigen::Matrix2d::Identity();
  OscillatorSpec oscillator;
  SpectrumList effective;
  std::vector<StudyRow> rows;  // ordered by eps (decreasing), then j
  std::vector<PowerFit> fits;
  SweepBounds mu1_bounds;

  std::vector<const StudyRow*> rows_for(int j) const;
};

/// Runs solve_full per eps (up to config.jobs at a time) and collects all
/// per-eps metrics. Solver failures are recorded per row.
StudyReport convergence_study(const StudyConfig& config);

/// Fits |mu_j^eps - mu_j| against eps for every j with at least 3 clean rows.
std::vector<PowerFit> fit_rows(const std::vector<StudyRow>& rows, const std::vector<int>& js);

void write_study_csv(std::ostream& os, const StudyReport& report);
void write_fit_json(std::ostream& os, const std::vector<PowerFit>& fits);

}  // namespace specloc
