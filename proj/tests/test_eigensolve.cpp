#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "specloc/eigensolve.hpp"
#include "specloc/error.hpp"

using namespace specloc;

namespace {

SparseMatrix diag(std::initializer_list<double> d) {
  SparseMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  int i = 0;
  for (double v : d) {
    m.insert(i, i) = v;
    ++i;
  }
  return m;
}

SparseMatrix random_spd(int n, std::mt19937_64& rng, double diag_boost) {
  std::uniform_real_distribution<double> dist(-1, 1);
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = dist(rng);
  Eigen::MatrixXd s = g * g.transpose() + diag_boost * Eigen::MatrixXd::Identity(n, n);
  s = 0.5 * (s + s.transpose()).eval();
  return s.sparseView();
}

struct Laplacian {
  SparseMatrix k, m;
};

Laplacian dirichlet_laplacian(int cells) {
  const Mesh2D mesh = build_rectangle_mesh(Point(0, 0), Point(1, 1), cells, cells);
  const Reduction red = Reduction::dirichlet(mesh, {BoundaryTag::DirichletOuter});
  const auto masses = assemble_masses(mesh, [](const Point&) { return 0.0; }, BoundaryTag::Hole);
  return {red.reduce(assemble_stiffness(mesh, DiffusionCoefficient::identity(), 1.0)), red.reduce(masses.volume)};
}

void check_b_orthonormal(const std::vector<EigenPair>& pairs, const SparseMatrix& b) {
  for (size_t i = 0; i < pairs.size(); ++i)
    for (size_t j = 0; j < pairs.size(); ++j) {
      const double g = pairs[i].vector.dot(b * pairs[j].vector);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-8);
    }
}

}  // namespace

TEST_CASE("diagonal pencil") {
  const SparseMatrix a = diag({3, 1, 2});
  const SparseMatrix b = diag({1, 1, 1});
  const auto pairs = smallest_eigenpairs(a, b, 3);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pairs[1].value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pairs[2].value == doctest::Approx(3.0).epsilon(1e-12));
  check_b_orthonormal(pairs, b);
}

TEST_CASE("Dirichlet Laplacian on the unit square") {
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  double previous_error = std::numeric_limits<double>::infinity();
  for (int cells : {16, 32}) {
    const Laplacian lap = dirichlet_laplacian(cells);
    const auto pairs = smallest_eigenpairs(lap.k, lap.m, 4);
    const double err = std::abs(pairs[0].value - exact) / exact;
    CHECK(err < previous_error);
    previous_error = err;
    for (const auto& p : pairs) CHECK(p.residual <= 1e-8);
    check_b_orthonormal(pairs, lap.m);
  }
  CHECK(previous_error <= 0.02);
}

TEST_CASE("random SPD pencil matches the dense oracle") {
  std::mt19937_64 rng(42);
  const int n = 50;
  const SparseMatrix a = random_spd(n, rng, 0.5);
  const SparseMatrix b = random_spd(n, rng, 5.0);
  const auto dense = dense_oracle(a, b, 6);
  EigenOptions opt;
  opt.tol = 1e-10;
  const auto lanczos = smallest_eigenpairs(a, b, 6, opt);
  for (int i = 0; i < 6; ++i)
    CHECK(std::abs(lanczos[i].value - dense[i].value) <= 1e-9 * std::abs(dense[i].value));
  check_b_orthonormal(lanczos, b);
}

TEST_CASE("Rayleigh quotients agree with the returned values") {
  const Laplacian lap = dirichlet_laplacian(20);
  EigenOptions opt;
  const auto pairs = smallest_eigenpairs(lap.k, lap.m, 6, opt);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    const double rq = p.vector.dot(lap.k * p.vector) / p.vector.dot(lap.m * p.vector);
    CHECK(std::abs(rq - p.value) <= 10 * opt.tol * std::abs(p.value));
    if (i > 0) CHECK(pairs[i].value >= pairs[i - 1].value);
  }
  // The continuous double eigenvalue 5 pi^2 splits on the diagonal mesh.
  const double five_pi2 = 5.0 * std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(pairs[1].value - five_pi2) <= 0.05 * five_pi2);
  CHECK(std::abs(pairs[2].value - five_pi2) <= 0.05 * five_pi2);
}

TEST_CASE("shift invariance of the pencil") {
  const Laplacian lap = dirichlet_laplacian(16);
  const double c = 250.0;
  const auto base = smallest_eigenpairs(lap.k, lap.m, 4);
  EigenOptions opt;
  opt.shift = 0.9 * (c + base[0].value);
  const auto shifted = smallest_eigenpairs(SparseMatrix(lap.k + c * lap.m), lap.m, 4, opt);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(shifted[i].value - base[i].value - c) <= 1e-7 * (c + base[i].value));
  // Simple eigenvalue: same vector up to sign.
  const double overlap = base[0].vector.dot(lap.m * shifted[0].vector);
  CHECK(std::abs(std::abs(overlap) - 1.0) <= 1e-8);
}

TEST_CASE("equal pencil has unit spectrum") {
  std::mt19937_64 rng(3);
  const SparseMatrix a = random_spd(12, rng, 1.0);
  for (const auto& p : dense_oracle(a, a, 12)) CHECK(p.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("error paths") {
  const SparseMatrix a = diag({1, 2, 3});
  const SparseMatrix b = diag({1, 1, 1});
  CHECK_THROWS_AS(dense_oracle(a, b, 4), DimensionError);
  CHECK_THROWS_AS(smallest_eigenpairs(a, b, 4), DimensionError);
  EigenOptions on_eigenvalue;
  on_eigenvalue.shift = 2.0;
  CHECK_THROWS_AS(smallest_eigenpairs(a, b, 1, on_eigenvalue), FactorizationError);

  const Laplacian lap = dirichlet_laplacian(16);
  EigenOptions hopeless;
  hopeless.tol = 1e-30;
  hopeless.max_restarts = 2;
  try {
    smallest_eigenpairs(lap.k, lap.m, 3, hopeless);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residuals().size() == 3);
    CHECK(e.best_residuals()[0] < 1e-6);
  }

  std::mt19937_64 rng(1);
  const int big = kDenseOracleMaxDim + 1;
  SparseMatrix eye(big, big);
  eye.setIdentity();
  CHECK_THROWS_AS(dense_oracle(eye, eye, 1), DimensionError);
}

TEST_CASE("deterministic for a fixed seed") {
  const Laplacian lap = dirichlet_laplacian(12);
  const auto a = smallest_eigenpairs(lap.k, lap.m, 3);
  const auto b = smallest_eigenpairs(lap.k, lap.m, 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK((a[i].vector - b[i].vector).norm() == 0.0);
  }
}

TEST_CASE("lowest mode lowers a shift that sits inside the spectrum") {
  const SparseMatrix a = diag({1, 2, 3, 4});
  const SparseMatrix b = diag({1, 1, 1, 1});
  EigenOptions opt;
  opt.shift = 2.5;
  opt.lowest = true;
  const auto pairs = smallest_eigenpairs(a, b, 2, opt);
  CHECK(pairs[0].value == doctest::Approx(1.0));
  CHECK(pairs[1].value == doctest::Approx(2.0));
  opt.lowest = false;
  CHECK(smallest_eigenpairs(a, b, 1, opt)[0].value == doctest::Approx(3.0));
}
