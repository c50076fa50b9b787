#pragma once

#include <array>
#include <iosfwd>
#include <memory>

#include "specloc/fem.hpp"

namespace specloc {

class CellLocator;

/// Periodic, mean-zero correctors N_1, N_2 on a cell mesh.
struct CorrectorSet {
  std::shared_ptr<const Mesh2D> mesh;
  std::shared_ptr<const CellLocator> locator;
  DiffusionCoefficient a;
  std::array<Vector, 2> n;  // nodal values on every cell-mesh vertex
  Measures cell;
  /// Relative residual of the reduced saddle systems (max over k).
  double residual = 0.0;
};

CorrectorSet solve_correctors(const Mesh2D& cell_mesh, const DiffusionCoefficient& a);

/// (1/|Y|) sum_T |T| a (e_j + grad N_j), symmetrized after an asymmetry check.
Eigen::Matrix2d effective_tensor(const CorrectorSet& correctors);

/// (1/|Y|) int a (e_j + grad phi).(e_j + grad phi) for a nodal field phi.
/// Minimized over periodic phi by the corrector N_j.
double corrector_energy(const CorrectorSet& correctors, int j, const Vector& phi);

struct CorrectorSample {
  bool in_hole = false;
  Eigen::Vector2d value = Eigen::Vector2d::Zero();
  /// Row k holds the cell-scale gradient of N_k.
  Eigen::Matrix2d gradient = Eigen::Matrix2d::Zero();
};

/// N at the cell image of (point - origin) / scale.
CorrectorSample corrector_eval(const CorrectorSet& correctors, const Point& point, double scale,
                               const Point& origin = Point::Zero());

/// Header plus one row: a11,a12,a22,cellArea,holePerimeter.
void write_effective_csv(std::ostream& os, const Eigen::Matrix2d& a_eff, const Measures& cell);

}  // namespace specloc
