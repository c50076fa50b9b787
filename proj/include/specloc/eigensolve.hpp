#pragma once

#include <cstdint>
#include <vector>

#include "specloc/fem.hpp"

namespace specloc {

struct EigenPair {
  double value = 0.0;
  Vector vector;
  /// ||A v - lambda B v||_2 / (|lambda| ||B v||_2)
  double residual = 0.0;
};

struct EigenOptions {
  double shift = 0.0;
  double tol = 1e-8;
  int max_restarts = 500;
  /// Block width; must exceed the largest wanted cluster multiplicity.
  int block_size = 4;
  /// Krylov basis size before a thick restart; 0 picks a default from k.
  int basis_size = 0;
  std::uint64_t seed = 0x5eed;
  /// Want the lowest eigenvalues: if the inertia of A - shift*B shows
  /// eigenvalues below the shift, the shift is lowered until none remain.
  bool lowest = false;
};

constexpr int kDenseOracleMaxDim = 2000;

/// The k eigenpairs of A v = lambda B v nearest above opt.shift, ascending and
/// B-orthonormal. Block shift-invert Lanczos with full B-reorthogonalization
/// and thick restarts; A - shift*B is factorized once (sparse LDL^T).
std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, int k,
                                           const EigenOptions& opt = {});

/// Full dense solve of the pencil; for verification on small problems only.
std::vector<EigenPair> dense_oracle(const SparseMatrix& a, const SparseMatrix& b, int k);

double relative_residual(const SparseMatrix& a, const SparseMatrix& b, double value, const Vector& v);

}  // namespace specloc
