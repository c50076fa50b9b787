#include "specloc/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"
#include "specloc/error.hpp"
#include "specloc/format.hpp"

namespace specloc {

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  PowerFit fit;
  std::vector<double> lx, ly;
  for (size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 3) return fit;
  const double n = fit.points;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx <= 0.0) return fit;
  fit.fitted = true;
  fit.rate = sxy / sxx;
  fit.constant = std::exp(my - fit.rate * mx);
  double ss_res = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    const double r = ly[i] - (my + fit.rate * (lx[i] - mx));
    ss_res += r * r;
  }
  // A perfectly flat series is fitted exactly.
  fit.r2 = syy > 1e-28 ? 1.0 - ss_res / syy : 1.0;
  fit.convergent = fit.rate > 0.05;
  return fit;
}

std::vector<const StudyRow*> StudyReport::rows_for(int j) const {
  std::vector<const StudyRow*> out;
  for (const auto& r : rows)
    if (r.j == j) out.push_back(&r);
  return out;
}

std::vector<PowerFit> fit_rows(const std::vector<StudyRow>& rows, const std::vector<int>& js) {
  std::vector<PowerFit> fits;
  for (int j : js) {
    std::vector<double> x, y;
    for (const auto& r : rows)
      if (r.j == j && r.ok) {
        x.push_back(r.eps);
        y.push_back(r.abs_err);
      }
    PowerFit f = fit_power_law(x, y);
    f.j = j;
    fits.push_back(f);
  }
  return fits;
}

namespace {

int cluster_of(const SpectrumList& s, int j) { return s.entries.at(j - 1).cluster; }

std::vector<StudyRow> study_one(const StudyConfig& config, double eps, const StudyReport& base,
                                const CorrectorSet& correctors, int k) {
  DomainSpec spec;
  spec.half_width = config.half_width;
  spec.epsilon = eps;
  spec.cell = config.cell;
  FullSolveOptions opt;
  opt.eigen = config.eigen;

  std::vector<StudyRow> rows;
  for (int j : config.js) {
    StudyRow r;
    r.eps = eps;
    r.j = j;
    r.mu_eff = base.effective.entries.at(j - 1).mu;
    rows.push_back(r);
  }
  try {
    const FullSolveResult result = solve_full(spec, config.coeffs, k, opt);
    const bool flag = sandwich_check(result).flag;
    for (auto& r : rows) {
      r.lambda = result.values[r.j - 1];
      r.mu_eps = extract_mu(r.lambda, eps, result.kappa0);
      r.abs_err = std::abs(r.mu_eps - r.mu_eff);
      r.loc_mass = localization_mass(result, r.j - 1, config.gamma);
      const int cluster = cluster_of(base.effective, r.j);
      const AnsatzReport a = ansatz_error(result, base.effective, cluster, correctors, base.oscillator);
      r.cluster_resolved = a.resolution.resolved;
      r.ansatz_err = a.fit.errors[r.j - base.effective.clusters[cluster - 1].first];
      r.sandwich_flag = flag;
      r.ok = true;
    }
  } catch (const Error& e) {
    for (auto& r : rows) r.error = e.what();
  }
  return rows;
}

}  // namespace

StudyReport convergence_study(const StudyConfig& config) {
  if (config.epsilons.empty()) throw ConfigurationError("study needs at least one eps");
  for (size_t i = 0; i < config.epsilons.size(); ++i) {
    DomainSpec spec;
    spec.half_width = config.half_width;
    spec.epsilon = config.epsilons[i];
    spec.cell = config.cell;
    spec.cells_per_side();
    if (i > 0 && !(config.epsilons[i] < config.epsilons[i - 1]))
      throw ConfigurationError("study eps list must be strictly decreasing");
  }
  if (config.js.empty()) throw ConfigurationError("study needs at least one eigenvalue index");
  for (int j : config.js)
    if (j < 1) throw ConfigurationError("eigenvalue indices are 1-based");

  StudyReport report;
  const CorrectorSet correctors = solve_correctors(build_cell_mesh(config.cell), config.coeffs.a);
  report.a_eff = effective_tensor(correctors);
  report.oscillator = build_oscillator(report.a_eff, correctors.cell, config.coeffs.q);

  // Every wanted cluster needs one discrete value beyond it for the resolution check.
  const int max_j = *std::max_element(config.js.begin(), config.js.end());
  report.effective = analytic_spectrum(report.oscillator, std::max(config.k, max_j));
  int k = std::max(config.k, max_j);
  for (int j : config.js) {
    const Cluster& c = report.effective.clusters[cluster_of(report.effective, j) - 1];
    k = std::max(k, c.first + c.size);
  }
  if (k > static_cast<int>(report.effective.entries.size())) report.effective = analytic_spectrum(report.oscillator, k);

  const int n = static_cast<int>(config.epsilons.size());
  std::vector<std::vector<StudyRow>> per_eps(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) per_eps[i] = study_one(config, config.epsilons[i], report, correctors, k);
  };
  const int jobs = std::clamp(config.jobs, 1, n);
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> mu1;
  for (const auto& rows : per_eps)
    for (const auto& r : rows) {
      report.rows.push_back(r);
      if (r.ok && r.j == 1) mu1.push_back(r.mu_eps);
    }
  report.fits = fit_rows(report.rows, config.js);
  report.mu1_bounds = sweep_bounds(mu1);
  return report;
}

void write_study_csv(std::ostream& os, const StudyReport& report) {
  os << "eps,j,lambda,mu_eps,mu_eff,abs_err,loc_mass,ansatz_err,sandwich_flag\n";
  for (const auto& r : report.rows) {
    os << format_number(r.eps) << ',' << r.j << ',';
    if (!r.ok) {
      os << "nan,nan," << format_number(r.mu_eff) << ",nan,nan,nan,failed\n";
      continue;
    }
    os << format_number(r.lambda) << ',' << format_number(r.mu_eps) << ',' << format_number(r.mu_eff) << ','
       << format_number(r.abs_err) << ',' << format_number(r.loc_mass) << ',';
    if (r.cluster_resolved) {
      os << format_number(r.ansatz_err);
    } else {
      os << "unresolved";
    }
    os << ',' << (r.sandwich_flag ? 1 : 0) << '\n';
  }
}

void write_fit_json(std::ostream& os, const std::vector<PowerFit>& fits) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& f : fits) {
    nlohmann::ordered_json o;
    o["j"] = f.j;
    if (f.fitted) {
      o["rate"] = f.rate;
      o["constant"] = f.constant;
      o["r2"] = f.r2;
    } else {
      o["rate"] = nullptr;
      o["constant"] = nullptr;
      o["r2"] = nullptr;
    }
    o["points"] = f.points;
    o["convergent"] = f.convergent;
    out.push_back(o);
  }
  os << out.dump(2) << '\n';
}

}  // namespace specloc
