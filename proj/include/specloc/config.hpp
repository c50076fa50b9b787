#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "specloc/study.hpp"

namespace specloc {

/// Flat "section.key = value" configuration. Every key is optional; the
/// defaults reproduce the reference sweep.
struct RunConfig {
  StudyConfig study;
  double shift_factor = 0.9;
  std::optional<double> solve_eps;  // solve: defaults to the first geometry.eps

  int effective_count = 6;
  double effective_box = 0.0;  // 0 selects 8 / kappa_min^{1/4}
  double effective_h = 1.0 / 16.0;
  double gap_tol = 1e-3;
  // Direct oscillator input; both or neither.
  std::optional<Eigen::Matrix2d> effective_a;
  std::optional<Eigen::Matrix2d> effective_q;

  std::string out_dir = "out";
};

/// Strict parser: unknown or repeated keys and malformed values raise
/// ConfigurationError with "source:line:" diagnostics.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace specloc
