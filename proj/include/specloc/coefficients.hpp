#pragma once

#include <Eigen/Core>

#include "specloc/geometry.hpp"

namespace specloc {

/// Unit-cell periodic diffusion matrix a(y).
struct DiffusionCoefficient {
  enum class Kind { ConstantMatrix, Laminate, Checker };

  Kind kind = Kind::ConstantMatrix;
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Identity();
  // Laminate: alpha(y1) = alpha1 for frac(y1) < fraction, alpha2 otherwise.
  // Checker: alpha1 on the (0,0) and (1,1) quarter cells, alpha2 on the others.
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double fraction = 0.5;

  static DiffusionCoefficient identity();
  static DiffusionCoefficient constant(const Eigen::Matrix2d& a);
  static DiffusionCoefficient laminate(double alpha1, double alpha2, double fraction = 0.5);
  static DiffusionCoefficient checker(double alpha1, double alpha2);

  /// a at cell coordinate y (wrapped into [0,1)^2).
  Eigen::Matrix2d at(const Point& y) const;
  /// Lower bound of the spectrum of a(y) over the cell (ellipticity constant).
  double ellipticity() const;
  /// Throws CoefficientError unless a is symmetric positive definite everywhere.
  void validate() const;
};

/// q(x) = q0 + 1/2 x^T H x + c3 * x1^3 * bump(|x| / R), bump(s) = (1 - s^2)^3 on s < 1.
/// The cubic term leaves q(0) and the Hessian at 0 untouched.
struct PotentialField {
  double q0 = 1.0;
  Eigen::Matrix2d hessian = 2.0 * Eigen::Matrix2d::Identity();
  double c3 = 0.0;
  double bump_radius = 0.5;

  double operator()(const Point& x) const;
  double min_value() const { return q0; }
  /// Throws CoefficientError if q0 <= 0 or H is not symmetric, HypothesisError if H is not positive definite.
  void validate() const;

  PotentialField scaled(double factor) const;
  PotentialField shifted(double constant) const;
};

struct CoefficientField {
  DiffusionCoefficient a;
  PotentialField q;
};

}  // namespace specloc
