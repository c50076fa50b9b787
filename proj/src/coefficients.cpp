#include "specloc/coefficients.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "specloc/error.hpp"

namespace specloc {

namespace {

double wrap(double t) { return t - std::floor(t); }

double min_eigenvalue(const Eigen::Matrix2d& a) {
  const double tr = a.trace();
  const double det = a.determinant();
  return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
}

}  // namespace

DiffusionCoefficient DiffusionCoefficient::identity() { return constant(Eigen::Matrix2d::Identity()); }

DiffusionCoefficient DiffusionCoefficient::constant(const Eigen::Matrix2d& a) {
  DiffusionCoefficient c;
  c.kind = Kind::ConstantMatrix;
  c.matrix = a;
  return c;
}

DiffusionCoefficient DiffusionCoefficient::laminate(double alpha1, double alpha2, double fraction) {
  DiffusionCoefficient c;
  c.kind = Kind::Laminate;
  c.alpha1 = alpha1;
  c.alpha2 = alpha2;
  c.fraction = fraction;
  return c;
}

DiffusionCoefficient DiffusionCoefficient::checker(double alpha1, double alpha2) {
  DiffusionCoefficient c;
  c.kind = Kind::Checker;
  c.alpha1 = alpha1;
  c.alpha2 = alpha2;
  return c;
}

Eigen::Matrix2d DiffusionCoefficient::at(const Point& y) const {
  switch (kind) {
    case Kind::ConstantMatrix:
      return matrix;
    case Kind::Laminate:
      return (wrap(y.x()) < fraction ? alpha1 : alpha2) * Eigen::Matrix2d::Identity();
    case Kind::Checker: {
      const int parity = static_cast<int>(std::floor(2.0 * wrap(y.x())) + std::floor(2.0 * wrap(y.y())));
      return (parity % 2 == 0 ? alpha1 : alpha2) * Eigen::Matrix2d::Identity();
    }
  }
  return matrix;
}

double DiffusionCoefficient::ellipticity() const {
  if (kind == Kind::ConstantMatrix) return min_eigenvalue(matrix);
  return std::min(alpha1, alpha2);
}

void DiffusionCoefficient::validate() const {
  if (kind == Kind::ConstantMatrix && matrix(0, 1) != matrix(1, 0))
    throw CoefficientError("diffusion matrix is not symmetric");
  if (kind == Kind::Laminate && !(fraction > 0.0 && fraction < 1.0))
    throw CoefficientError("laminate fraction must lie in (0, 1)");
  if (!(ellipticity() > 0.0)) {
    std::ostringstream os;
    os << "diffusion coefficient is not uniformly elliptic (smallest eigenvalue " << ellipticity() << ")";
    throw CoefficientError(os.str());
  }
}

double PotentialField::operator()(const Point& x) const {
  double value = q0 + 0.5 * x.dot(hessian * x);
  if (c3 != 0.0) {
    const double s2 = x.squaredNorm() / (bump_radius * bump_radius);
    if (s2 < 1.0) {
      const double b = 1.0 - s2;
      value += c3 * x.x() * x.x() * x.x() * b * b * b;
    }
  }
  return value;
}

void PotentialField::validate() const {
  if (!(q0 > 0.0)) throw CoefficientError("q0 must be positive");
  if (hessian(0, 1) != hessian(1, 0)) throw CoefficientError("Hessian of q must be symmetric");
  if (!(hessian(0, 0) > 0.0 && hessian.determinant() > 0.0))
    throw HypothesisError("Hessian of q is not positive definite; the minimum at 0 is degenerate");
  if (c3 != 0.0 && !(bump_radius > 0.0)) throw CoefficientError("bump radius must be positive");
}

PotentialField PotentialField::scaled(double factor) const {
  PotentialField q = *this;
  q.q0 *= factor;
  q.hessian *= factor;
  q.c3 *= factor;
  return q;
}

PotentialField PotentialField::shifted(double constant) const {
  PotentialField q = *this;
  q.q0 += constant;
  return q;
}

}  // namespace specloc
