#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "specloc/config.hpp"
#include "specloc/error.hpp"
#include "specloc/format.hpp"

using namespace specloc;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream os(dir / name);
  if (!os) throw ConfigurationError("cannot write " + (dir / name).string());
  return os;
}

int jobs_from_env() {
  const char* env = std::getenv("SPECLOC_JOBS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigurationError(std::string("SPECLOC_JOBS must be a positive integer, got '") + env + "'");
  return static_cast<int>(n);
}

RunConfig prepare(const Options& o) {
  RunConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.seed) cfg.study.eigen.seed = *o.seed;
  cfg.study.jobs = o.jobs ? *o.jobs : jobs_from_env();
  if (cfg.study.jobs < 1) throw ConfigurationError("--jobs must be positive");
  return cfg;
}

struct CellResult {
  CorrectorSet correctors;
  Eigen::Matrix2d a_eff;
};

CellResult cell_stage(const RunConfig& cfg) {
  CellResult r{solve_correctors(build_cell_mesh(cfg.study.cell), cfg.study.coeffs.a), Eigen::Matrix2d::Identity()};
  r.a_eff = effective_tensor(r.correctors);
  return r;
}

void run_cell(const RunConfig& cfg) {
  const CellResult r = cell_stage(cfg);
  auto os = open_output(cfg.out_dir, "effective_tensor.csv");
  write_effective_csv(os, r.a_eff, r.correctors.cell);
  write_effective_csv(std::cout, r.a_eff, r.correctors.cell);
}

void run_effective(const RunConfig& cfg) {
  OscillatorSpec spec;
  if (cfg.effective_a) {
    spec.a = *cfg.effective_a;
    spec.q = *cfg.effective_q;
    spec.kappa0 = 1.0;
  } else {
    const CellResult r = cell_stage(cfg);
    spec = build_oscillator(r.a_eff, r.correctors.cell, cfg.study.coeffs.q);
  }
  const SpectrumList analytic = analytic_spectrum(spec, cfg.effective_count, cfg.gap_tol);
  const SpectrumList numeric =
      numeric_oscillator(spec, cfg.effective_box, cfg.effective_h, cfg.effective_count, cfg.gap_tol, cfg.study.eigen);
  auto os = open_output(cfg.out_dir, "spectrum.csv");
  write_spectrum_csv(os, analytic, &numeric);
  write_spectrum_csv(std::cout, analytic, &numeric);
}

void run_solve(const RunConfig& cfg) {
  DomainSpec spec;
  spec.half_width = cfg.study.half_width;
  spec.epsilon = cfg.solve_eps ? *cfg.solve_eps : cfg.study.epsilons.front();
  spec.cell = cfg.study.cell;
  FullSolveOptions opt;
  opt.eigen = cfg.study.eigen;
  opt.shift_factor = cfg.shift_factor;
  const FullSolveResult r = solve_full(spec, cfg.study.coeffs, cfg.study.k, opt);

  auto values = open_output(cfg.out_dir, "eigenvalues.csv");
  values << "j,lambda,mu_eps,residual\n";
  for (size_t j = 0; j < r.values.size(); ++j)
    values << j + 1 << ',' << format_number(r.values[j]) << ',' << format_number(extract_mu(r.values[j], r.epsilon, r.kappa0))
           << ',' << format_number(r.residuals[j]) << '\n';

  auto cloud = open_output(cfg.out_dir, "eigenfunctions.csv");
  cloud << "x,y";
  for (size_t j = 0; j < r.vectors.size(); ++j) cloud << ",u" << j + 1;
  cloud << '\n';
  for (int v = 0; v < r.mesh->num_vertices(); ++v) {
    cloud << format_number(r.mesh->vertices[v].x()) << ',' << format_number(r.mesh->vertices[v].y());
    for (const auto& u : r.vectors) cloud << ',' << format_number(u[v]);
    cloud << '\n';
  }
  std::cout << "eps = " << format_number(r.epsilon) << ", " << r.unknowns << " unknowns, lambda_1 = "
            << format_number(r.values.front()) << '\n';
}

void run_study(const RunConfig& cfg) {
  const StudyReport report = convergence_study(cfg.study);
  auto csv = open_output(cfg.out_dir, "study.csv");
  write_study_csv(csv, report);
  auto json = open_output(cfg.out_dir, "fit.json");
  write_fit_json(json, report.fits);
  int failed = 0;
  for (const auto& r : report.rows) failed += !r.ok;
  std::cout << report.rows.size() << " rows (" << failed << " failed); ";
  for (const auto& f : report.fits) {
    std::cout << "j = " << f.j << ": ";
    if (f.fitted) {
      std::cout << "rate " << format_number(f.rate) << ", r2 " << format_number(f.r2);
    } else {
      std::cout << "fit skipped";
    }
    std::cout << "; ";
  }
  std::cout << '\n';
}

void run_check_trace(const RunConfig& cfg) {
  const Measures cell = measures(build_cell_mesh(cfg.study.cell));
  if (!(cell.surface > 0.0)) throw HypothesisError("the trace identity needs a perforated cell");
  const double ratio = cell.surface / cell.area;
  const double l = cfg.study.half_width;
  auto os = open_output(cfg.out_dir, "trace.csv");
  os << "eps,gap,bound,ratio,constant_gap\n";
  for (double eps : cfg.study.epsilons) {
    DomainSpec spec;
    spec.half_width = l;
    spec.epsilon = eps;
    spec.cell = cfg.study.cell;
    const Mesh2D mesh = build_perforated_mesh(spec);
    Vector w(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      const Point& x = mesh.vertices[v];
      w[v] = std::cos(std::numbers::pi * x.x() / (2 * l)) * std::cos(std::numbers::pi * x.y() / (2 * l));
    }
    const TraceCheck t = trace_identity_check(mesh, w, ratio, eps);
    const TraceCheck one = trace_identity_check(mesh, Vector::Ones(mesh.num_vertices()), ratio, eps);
    const double scale = ratio / eps * measures(mesh).area;
    os << format_number(eps) << ',' << format_number(t.gap) << ',' << format_number(t.bound) << ','
       << format_number(t.ratio()) << ',' << format_number(one.gap / scale) << '\n';
  }
  std::cout << "wrote " << (fs::path(cfg.out_dir) / "trace.csv").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral localization in perforated domains"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;
  int jobs = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "configuration file")->required();
    sub->add_option("--out", opt.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "seed of the eigensolver start block");
    sub->add_option("--jobs", jobs, "concurrent eps solves (fallback: SPECLOC_JOBS)")->check(CLI::PositiveNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"cell", "solve the cell problem and write the effective tensor", run_cell},
      {"effective", "effective oscillator spectrum, closed form and numeric", run_effective},
      {"solve", "full perforated-domain eigenproblem for one eps", run_solve},
      {"study", "convergence study over the eps list", run_study},
      {"check-trace", "surface/volume trace identity table", run_check_trace},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    subs.push_back(app.add_subcommand(c.name, c.help));
    add_common(subs.back());
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      if (subs[i]->count("--seed")) opt.seed = seed;
      if (subs[i]->count("--jobs")) opt.jobs = jobs;
      commands[i].run(prepare(opt));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
