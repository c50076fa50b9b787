#include "specloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "specloc/error.hpp"

namespace specloc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Diagnostics {
 public:
  explicit Diagnostics(std::string source) : source_(std::move(source)) {}
  [[noreturn]] void fail(int line, const std::string& msg) const {
    std::ostringstream os;
    os << source_ << ':' << line << ": " << msg;
    throw ConfigurationError(os.str());
  }

 private:
  std::string source_;
};

bool parse_plain(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

// Accepts decimal numbers and exact fractions "p/q".
bool parse_real(const std::string& text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_plain(s, out);
  double num = 0.0, den = 0.0;
  if (!parse_plain(trim(s.substr(0, slash)), num) || !parse_plain(trim(s.substr(slash + 1)), den) || den == 0.0)
    return false;
  out = num / den;
  return true;
}

bool parse_int(const std::string& text, long long& out) {
  const std::string s = trim(text);
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return !s.empty() && r.ec == std::errc() && r.ptr == end;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(trim(item));
  return out;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  const Diagnostics diag(source);
  RunConfig cfg;
  StudyConfig& st = cfg.study;
  std::map<std::string, int> seen;
  std::map<std::string, int> lines;

  std::string a_kind = "identity";
  Eigen::Matrix2d a_matrix = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d eff_a = Eigen::Matrix2d::Identity(), eff_q = Eigen::Matrix2d::Identity();
  bool has_eff_a = false, has_eff_q = false;

  using Setter = std::function<void(const std::string&, int)>;
  auto real = [&](double& target, const char* what) -> Setter {
    return [&target, what, &diag](const std::string& v, int line) {
      if (!parse_real(v, target)) diag.fail(line, std::string("expected a number for ") + what + ", got '" + v + "'");
    };
  };
  auto integer = [&](int& target, const char* what) -> Setter {
    return [&target, what, &diag](const std::string& v, int line) {
      long long x = 0;
      if (!parse_int(v, x) || x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        diag.fail(line, std::string("expected an integer for ") + what + ", got '" + v + "'");
      target = static_cast<int>(x);
    };
  };
  auto entry = [&](Eigen::Matrix2d& m, int i, int j, bool* flag, const char* what) -> Setter {
    return [&m, i, j, flag, what, &diag](const std::string& v, int line) {
      double x = 0.0;
      if (!parse_real(v, x)) diag.fail(line, std::string("expected a number for ") + what + ", got '" + v + "'");
      m(i, j) = x;
      m(j, i) = x;
      if (flag) *flag = true;
    };
  };

  double solve_eps = 0.0;
  const std::map<std::string, Setter> keys{
      {"geometry.L", real(st.half_width, "geometry.L")},
      {"geometry.eps",
       [&](const std::string& v, int line) {
         st.epsilons.clear();
         for (const auto& item : split_list(v)) {
           double e = 0.0;
           if (!parse_real(item, e) || !(e > 0.0)) diag.fail(line, "geometry.eps: bad value '" + item + "'");
           st.epsilons.push_back(e);
         }
       }},
      {"geometry.hole_radius", real(st.cell.hole_radius, "geometry.hole_radius")},
      {"geometry.n_seg", integer(st.cell.n_seg, "geometry.n_seg")},
      {"geometry.h", real(st.cell.h, "geometry.h")},
      {"coefficients.a",
       [&](const std::string& v, int line) {
         if (v != "identity" && v != "constant" && v != "laminate" && v != "checker")
           diag.fail(line, "coefficients.a must be identity, constant, laminate or checker");
         a_kind = v;
       }},
      {"coefficients.a11", entry(a_matrix, 0, 0, nullptr, "coefficients.a11")},
      {"coefficients.a12", entry(a_matrix, 0, 1, nullptr, "coefficients.a12")},
      {"coefficients.a22", entry(a_matrix, 1, 1, nullptr, "coefficients.a22")},
      {"coefficients.alpha1", real(st.coeffs.a.alpha1, "coefficients.alpha1")},
      {"coefficients.alpha2", real(st.coeffs.a.alpha2, "coefficients.alpha2")},
      {"coefficients.fraction", real(st.coeffs.a.fraction, "coefficients.fraction")},
      {"coefficients.q0", real(st.coeffs.q.q0, "coefficients.q0")},
      {"coefficients.H11", entry(st.coeffs.q.hessian, 0, 0, nullptr, "coefficients.H11")},
      {"coefficients.H12", entry(st.coeffs.q.hessian, 0, 1, nullptr, "coefficients.H12")},
      {"coefficients.H22", entry(st.coeffs.q.hessian, 1, 1, nullptr, "coefficients.H22")},
      {"coefficients.c3", real(st.coeffs.q.c3, "coefficients.c3")},
      {"coefficients.bump_radius", real(st.coeffs.q.bump_radius, "coefficients.bump_radius")},
      {"solver.k", integer(st.k, "solver.k")},
      {"solver.tol", real(st.eigen.tol, "solver.tol")},
      {"solver.max_restarts", integer(st.eigen.max_restarts, "solver.max_restarts")},
      {"solver.block_size", integer(st.eigen.block_size, "solver.block_size")},
      {"solver.shift_factor", real(cfg.shift_factor, "solver.shift_factor")},
      {"solve.eps", real(solve_eps, "solve.eps")},
      {"study.j",
       [&](const std::string& v, int line) {
         st.js.clear();
         for (const auto& item : split_list(v)) {
           long long j = 0;
           if (!parse_int(item, j) || j < 1 || j > 1000) diag.fail(line, "study.j: bad index '" + item + "'");
           st.js.push_back(static_cast<int>(j));
         }
       }},
      {"study.gamma", real(st.gamma, "study.gamma")},
      {"effective.count", integer(cfg.effective_count, "effective.count")},
      {"effective.box", real(cfg.effective_box, "effective.box")},
      {"effective.h", real(cfg.effective_h, "effective.h")},
      {"effective.gap_tol", real(cfg.gap_tol, "effective.gap_tol")},
      {"effective.A11", entry(eff_a, 0, 0, &has_eff_a, "effective.A11")},
      {"effective.A12", entry(eff_a, 0, 1, &has_eff_a, "effective.A12")},
      {"effective.A22", entry(eff_a, 1, 1, &has_eff_a, "effective.A22")},
      {"effective.Q11", entry(eff_q, 0, 0, &has_eff_q, "effective.Q11")},
      {"effective.Q12", entry(eff_q, 0, 1, &has_eff_q, "effective.Q12")},
      {"effective.Q22", entry(eff_q, 1, 1, &has_eff_q, "effective.Q22")},
      {"output.dir",
       [&](const std::string& v, int line) {
         if (v.empty()) diag.fail(line, "output.dir must not be empty");
         cfg.out_dir = v;
       }},
      {"output.format",
       [&](const std::string& v, int line) {
         if (v != "csv") diag.fail(line, "output.format supports only csv");
       }},
  };

  int line_no = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) diag.fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end()) diag.fail(line_no, "unknown key '" + key + "'");
    if (seen.count(key)) {
      std::ostringstream os;
      os << "duplicate key '" << key << "' (first set on line " << seen[key] << ")";
      diag.fail(line_no, os.str());
    }
    seen[key] = line_no;
    if (value.empty()) diag.fail(line_no, "missing value for '" + key + "'");
    it->second(value, line_no);
  }

  // Points at the last related key, where an inconsistent set became complete.
  auto line_of = [&](std::initializer_list<const char*> candidates) {
    int line = 0;
    for (const char* k : candidates)
      if (seen.count(k)) line = std::max(line, seen[k]);
    return line;
  };
  auto recheck = [&](std::initializer_list<const char*> related, const std::function<void()>& check) {
    try {
      check();
    } catch (const ValidationError& e) {
      diag.fail(line_of(related), e.what());
    }
  };

  if (a_kind == "identity") {
    st.coeffs.a = DiffusionCoefficient::identity();
  } else if (a_kind == "constant") {
    st.coeffs.a = DiffusionCoefficient::constant(a_matrix);
  } else if (a_kind == "laminate") {
    st.coeffs.a = DiffusionCoefficient::laminate(st.coeffs.a.alpha1, st.coeffs.a.alpha2, st.coeffs.a.fraction);
  } else {
    st.coeffs.a = DiffusionCoefficient::checker(st.coeffs.a.alpha1, st.coeffs.a.alpha2);
  }

  recheck({"geometry.hole_radius", "geometry.n_seg", "geometry.h"}, [&] { st.cell.validate(); });
  recheck({"geometry.eps", "geometry.L"}, [&] {
    if (!(st.half_width > 0.0)) throw ConfigurationError("geometry.L must be positive");
    for (double e : st.epsilons) {
      DomainSpec d;
      d.half_width = st.half_width;
      d.epsilon = e;
      d.cells_per_side();
    }
    for (size_t i = 1; i < st.epsilons.size(); ++i)
      if (!(st.epsilons[i] < st.epsilons[i - 1])) throw ConfigurationError("geometry.eps must be strictly decreasing");
  });
  recheck({"coefficients.a", "coefficients.a11", "coefficients.alpha1"}, [&] { st.coeffs.a.validate(); });
  recheck({"coefficients.q0", "coefficients.H11", "coefficients.H12", "coefficients.H22", "coefficients.c3",
           "coefficients.bump_radius"},
          [&] { st.coeffs.q.validate(); });
  recheck({"solver.k", "solver.tol", "solver.block_size", "solver.max_restarts", "solver.shift_factor"}, [&] {
    if (st.k < 1) throw ConfigurationError("solver.k must be positive");
    if (!(st.eigen.tol > 0.0)) throw ConfigurationError("solver.tol must be positive");
    if (st.eigen.block_size < 1) throw ConfigurationError("solver.block_size must be positive");
    if (st.eigen.max_restarts < 0) throw ConfigurationError("solver.max_restarts must be nonnegative");
    if (!(cfg.shift_factor < 1.0)) throw ConfigurationError("solver.shift_factor must be below 1");
  });
  recheck({"study.gamma"}, [&] {
    if (!(st.gamma >= 0.0)) throw ConfigurationError("study.gamma must be nonnegative");
  });
  recheck({"effective.count", "effective.h", "effective.box"}, [&] {
    if (cfg.effective_count < 1) throw ConfigurationError("effective.count must be positive");
    if (!(cfg.effective_h > 0.0)) throw ConfigurationError("effective.h must be positive");
    if (cfg.effective_box < 0.0) throw ConfigurationError("effective.box must be nonnegative");
  });
  if (has_eff_a != has_eff_q)
    diag.fail(line_of({"effective.A11", "effective.A12", "effective.A22", "effective.Q11", "effective.Q12",
                       "effective.Q22"}),
              "effective.A* and effective.Q* must be given together");
  if (has_eff_a) {
    cfg.effective_a = eff_a;
    cfg.effective_q = eff_q;
    recheck({"effective.A11", "effective.A12", "effective.A22", "effective.Q11", "effective.Q12", "effective.Q22"},
            [&] {
              OscillatorSpec s;
              s.a = eff_a;
              s.q = eff_q;
              s.kappa0 = 1.0;
              s.validate();
            });
  }
  if (seen.count("solve.eps")) {
    recheck({"solve.eps"}, [&] {
      DomainSpec d;
      d.half_width = st.half_width;
      d.epsilon = solve_eps;
      d.cells_per_side();
    });
    cfg.solve_eps = solve_eps;
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace specloc
