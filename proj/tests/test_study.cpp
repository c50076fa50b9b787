#include <cmath>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "specloc/error.hpp"
#include "specloc/study.hpp"

using namespace specloc;

namespace {

StudyConfig coarse_study() {
  StudyConfig c;
  c.cell.hole_radius = 0.25;
  c.cell.n_seg = 16;
  c.cell.h = 0.125;
  c.epsilons = {1.0, 0.5, 1.0 / 3.0, 0.25};
  c.coeffs.q.hessian << 2.0, 0.0, 0.0, 4.0;
  c.js = {1, 2};
  return c;
}

}  // namespace

TEST_CASE("exact power law") {
  const double mu = 3.0;
  std::vector<double> eps{0.5, 1.0 / 3.0, 0.25, 1.0 / 6.0, 0.125}, err;
  for (double e : eps) err.push_back(std::abs((mu + std::pow(e, 0.25)) - mu));
  const PowerFit f = fit_power_law(eps, err);
  REQUIRE(f.fitted);
  CHECK(f.rate == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(f.constant == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.convergent);
}

TEST_CASE("constant error is flagged as non-convergent") {
  const PowerFit f = fit_power_law({0.5, 0.25, 0.125}, {0.3, 0.3, 0.3});
  REQUIRE(f.fitted);
  CHECK(std::abs(f.rate) <= 1e-12);
  CHECK(f.r2 == 1.0);
  CHECK_FALSE(f.convergent);
}

TEST_CASE("fit needs three clean points") {
  CHECK_FALSE(fit_power_law({0.5, 0.25}, {1.0, 0.5}).fitted);
  CHECK_FALSE(fit_power_law({0.5, 0.25, 0.125}, {1.0, 0.0, 0.5}).fitted);
}

TEST_CASE("coarse study end to end") {
  StudyConfig c = coarse_study();
  const StudyReport serial = convergence_study(c);
  REQUIRE(serial.rows.size() == 8);
  for (size_t i = 0; i < serial.rows.size(); ++i) {
    const StudyRow& r = serial.rows[i];
    CHECK(r.ok);
    CHECK(r.eps == c.epsilons[i / 2]);
    CHECK(r.j == c.js[i % 2]);
    CHECK(r.abs_err == doctest::Approx(std::abs(r.mu_eps - r.mu_eff)));
    CHECK(r.loc_mass > 0.0);
    CHECK(r.loc_mass < 1.0);
    CHECK(r.cluster_resolved);
  }
  REQUIRE(serial.fits.size() == 2);
  CHECK(serial.fits[0].fitted);
  CHECK(std::isfinite(serial.fits[0].rate));
  CHECK_FALSE(serial.mu1_bounds.flag);

  c.jobs = 3;
  const StudyReport parallel = convergence_study(c);
  std::ostringstream a, b;
  write_study_csv(a, serial);
  write_study_csv(b, parallel);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("eps,j,lambda,mu_eps,mu_eff,abs_err,loc_mass,ansatz_err,sandwich_flag\n", 0) == 0);

  std::ostringstream js;
  write_fit_json(js, serial.fits);
  const auto parsed = nlohmann::json::parse(js.str());
  CHECK(parsed.size() == 2);
  CHECK(parsed[0]["j"] == 1);
  CHECK(parsed[0]["rate"].is_number());
  CHECK(parsed[0]["r2"].is_number());
}

TEST_CASE("solver failures are recorded per row") {
  StudyConfig c = coarse_study();
  c.js = {1};
  c.eigen.tol = 1e-30;
  c.eigen.max_restarts = 0;
  const StudyReport r = convergence_study(c);
  for (const auto& row : r.rows) {
    CHECK_FALSE(row.ok);
    CHECK_FALSE(row.error.empty());
  }
  CHECK_FALSE(r.fits[0].fitted);
  std::ostringstream os;
  write_study_csv(os, r);
  CHECK(os.str().find("failed") != std::string::npos);
  std::ostringstream js;
  write_fit_json(js, r.fits);
  CHECK(nlohmann::json::parse(js.str())[0]["rate"].is_null());
}

TEST_CASE("study input validation") {
  StudyConfig c = coarse_study();
  c.epsilons = {0.25, 0.5};
  CHECK_THROWS_AS(convergence_study(c), ConfigurationError);
  c.epsilons = {0.5, 0.3};
  CHECK_THROWS_AS(convergence_study(c), ConfigurationError);
  c.epsilons = {0.5};
  c.js = {0};
  CHECK_THROWS_AS(convergence_study(c), ConfigurationError);
}
