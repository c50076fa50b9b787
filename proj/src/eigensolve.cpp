#include "specloc/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "specloc/error.hpp"

namespace specloc {

namespace {

using Eigen::MatrixXd;

class KrylovBasis {
 public:
  KrylovBasis(const SparseMatrix& b, int n, int capacity, std::mt19937_64& rng)
      : b_(b), v_(n, capacity), bv_(n, capacity), rng_(rng) {}

  int size() const { return cols_; }
  int capacity() const { return static_cast<int>(v_.cols()); }
  auto basis() const { return v_.leftCols(cols_); }
  auto b_basis() const { return bv_.leftCols(cols_); }

  void reset(const MatrixXd& v, const MatrixXd& bv) {
    cols_ = static_cast<int>(v.cols());
    v_.leftCols(cols_) = v;
    bv_.leftCols(cols_) = bv;
  }

  /// B-orthonormalizes w against the basis and appends it. Returns the number
  /// of columns appended.
  int append(MatrixXd w) {
    const int first = cols_;
    for (int j = 0; j < w.cols() && cols_ < capacity(); ++j) {
      Vector x = w.col(j);
      for (int attempt = 0; attempt < 4; ++attempt) {
        const double before = std::sqrt(std::max(0.0, x.dot(b_ * x)));
        Vector bx;
        for (int pass = 0; pass < 2; ++pass) {
          x -= v_.leftCols(cols_) * (bv_.leftCols(cols_).transpose() * x);
        }
        bx = b_ * x;
        const double norm = std::sqrt(std::max(0.0, x.dot(bx)));
        if (norm > 1e-10 * before && norm > 0.0) {
          v_.col(cols_) = x / norm;
          bv_.col(cols_) = bx / norm;
          ++cols_;
          break;
        }
        // Deflated direction: substitute a random one.
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < x.size(); ++i) x[i] = dist(rng_);
      }
    }
    return cols_ - first;
  }

 private:
  const SparseMatrix& b_;
  MatrixXd v_, bv_;
  int cols_ = 0;
  std::mt19937_64& rng_;
};

EigenPair make_pair(const SparseMatrix& a, const SparseMatrix& b, double value, Vector v) {
  EigenPair p;
  p.value = value;
  p.residual = relative_residual(a, b, value, v);
  p.vector = std::move(v);
  return p;
}

}  // namespace

double relative_residual(const SparseMatrix& a, const SparseMatrix& b, double value, const Vector& v) {
  const Vector bv = b * v;
  const Vector r = a * v - value * bv;
  const double denom = std::abs(value) * bv.norm();
  return denom > 0.0 ? r.norm() / denom : r.norm();
}

std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& a, const SparseMatrix& b, int k,
                                           const EigenOptions& opt) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || b.rows() != n || b.cols() != n) throw DimensionError("pencil dimensions differ");
  if (k < 1 || k > n) throw DimensionError("requested eigenpair count outside [1, n]");

  double shift = opt.shift;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
  for (int attempt = 0;; ++attempt) {
    ldlt.compute(SparseMatrix(a - shift * b));
    if (ldlt.info() != Eigen::Success) throw FactorizationError(shift);
    const Vector d = ldlt.vectorD();
    const double scale = d.cwiseAbs().maxCoeff();
    if (!(d.cwiseAbs().minCoeff() > 1e-14 * scale)) throw FactorizationError(shift);
    // Sylvester: negative pivots count the eigenvalues below the shift.
    const bool below = (d.array() < 0.0).any();
    if (!opt.lowest || !below) break;
    if (attempt == 60) throw FactorizationError(shift);
    shift -= 2.0 * std::max(1.0, std::abs(shift));
  }
  auto apply_op = [&](const MatrixXd& x) -> MatrixXd {
    MatrixXd bx = b * x;
    return ldlt.solve(bx);
  };

  const int p = std::clamp(opt.block_size, 1, n);
  int m = opt.basis_size > 0 ? opt.basis_size : std::max(3 * k, k + 3 * p + 10);
  m = std::min(m, n);
  const int keep_max = std::min(m - p, k + p);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  MatrixXd start(n, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) start(i, j) = dist(rng);

  KrylovBasis basis(b, n, m, rng);
  basis.append(apply_op(start));
  MatrixXd last = basis.basis().rightCols(basis.size());

  std::vector<double> best(k, std::numeric_limits<double>::infinity());
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    while (basis.size() < m) {
      const int before = basis.size();
      const int added = basis.append(apply_op(last));
      if (added == 0) break;
      last = basis.basis().middleCols(before, added);
    }

    const MatrixXd v = basis.basis();
    const MatrixXd av = a * v;
    MatrixXd t = v.transpose() * av;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> ritz(t);
    const Vector& theta = ritz.eigenvalues();
    const MatrixXd& y = ritz.eigenvectors();

    std::vector<int> order;
    for (int i = 0; i < theta.size(); ++i)
      if (theta[i] > shift) order.push_back(i);
    for (int i = 0; i < theta.size(); ++i)
      if (theta[i] <= shift) order.push_back(i);

    const int wanted = std::min<int>(k, static_cast<int>(order.size()));
    std::vector<EigenPair> pairs;
    std::vector<int> unconverged;
    const auto above = std::count_if(order.begin(), order.end(), [&](int i) { return theta[i] > shift; });
    bool all_converged = above >= k;
    for (int w = 0; w < wanted; ++w) {
      const int i = order[w];
      Vector x = v * y.col(i);
      const Vector ax = av * y.col(i);
      const Vector bx = b * x;
      const double res = (ax - theta[i] * bx).norm() / (std::abs(theta[i]) * bx.norm());
      best[w] = std::min(best[w], res);
      if (!(res <= opt.tol)) {
        all_converged = false;
        unconverged.push_back(i);
      }
      pairs.push_back(EigenPair{theta[i], std::move(x), res});
    }
    if (all_converged || basis.size() == n) {
      if (!all_converged) {
        // Exhausted the space: the Ritz pairs are exact up to round-off.
        for (auto& pr : pairs) pr.residual = relative_residual(a, b, pr.value, pr.vector);
      }
      return pairs;
    }

    // Thick restart: keep the leading Ritz vectors, continue from the
    // unconverged ones.
    const int keep = std::min<int>(keep_max, static_cast<int>(order.size()));
    MatrixXd yk(y.rows(), keep);
    for (int j = 0; j < keep; ++j) yk.col(j) = y.col(order[j]);
    basis.reset(v * yk, basis.b_basis() * yk);
    std::vector<int> seeds = unconverged;
    for (int j = 0; j < keep && static_cast<int>(seeds.size()) < p; ++j)
      if (std::find(seeds.begin(), seeds.end(), order[j]) == seeds.end()) seeds.push_back(order[j]);
    seeds.resize(std::min<size_t>(seeds.size(), p));
    last.resize(n, seeds.size());
    for (size_t j = 0; j < seeds.size(); ++j) last.col(j) = v * y.col(seeds[j]);
  }
  throw ConvergenceError(opt.max_restarts, best);
}

std::vector<EigenPair> dense_oracle(const SparseMatrix& a, const SparseMatrix& b, int k) {
  const int n = static_cast<int>(a.rows());
  if (n > kDenseOracleMaxDim) {
    std::ostringstream os;
    os << "dense oracle limited to dimension " << kDenseOracleMaxDim << ", got " << n;
    throw DimensionError(os.str());
  }
  if (k < 1 || k > n) throw DimensionError("requested eigenpair count outside [1, n]");
  const MatrixXd ad = MatrixXd(a);
  const MatrixXd bd = MatrixXd(b);
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> solver(ad, bd, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) throw SolverError("dense generalized eigensolver failed");
  std::vector<EigenPair> out;
  for (int i = 0; i < k; ++i) out.push_back(make_pair(a, b, solver.eigenvalues()[i], solver.eigenvectors().col(i)));
  return out;
}

}  // namespace specloc
