#pragma once
// Experiment driver behind `teig run`: builds the hierarchy, runs the
// single-level and/or multi-level solvers and writes
//   eigenvalues.csv  method,level,h,index,re,im,residual
//   orders.csv       method,eigenvalue,quantity,i,h,order
//   run.json         config echo, sizes, timings, warnings, flags
//   plotdata/        <method>_<quantity>_<eigenvalue>.dat: "h error" rows
// Numbers carry 12 significant digits. CSV content depends only on the
// configuration; run.json additionally holds wall-clock timings.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teig/config.hpp"
#include "teig/eigensolver.hpp"
#include "teig/multilevel.hpp"

namespace teig {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// Closure tolerance applied to every level's spectrum.
inline constexpr double kClosureTolerance = 1e-6;
/// Single/multi agreement below which mode = both stays silent.
inline constexpr double kCrossCheckTolerance = 1e-5;

struct LevelSummary {
  int level = 0;
  double h = 0.0;
  int vertices = 0, triangles = 0;
  std::array<int, kFieldCount> dims{};
  int system_dim = 0;
};

struct MethodRun {
  std::string method;  // "single" or "multi"
  std::vector<LevelResult> levels;
  std::optional<ConvergenceReport> report;
  std::vector<std::string> warnings;
  std::vector<std::string> closure_violations;
  std::string error;   // non-empty if the solver failed
  double seconds = 0.0;
  bool failed() const { return !error.empty(); }
};

struct RunResult {
  RunConfig config;
  std::vector<LevelSummary> levels;
  double build_seconds = 0.0;
  std::vector<MethodRun> methods;
  std::vector<std::string> warnings;
  std::optional<double> cross_difference;  // mode = both: max relative gap on the finest level
  int exit_code = kExitOk;
  std::string error;
};

namespace detail {

inline std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline MethodRun run_method(const LevelHierarchy& h, const RunConfig& cfg, bool multi) {
  MethodRun out;
  out.method = multi ? "multi" : "single";
  const auto t0 = std::chrono::steady_clock::now();
  const SolveOptions opt = cfg.solve_options();
  try {
    if (multi) {
      MultilevelResult r = algorithm1(h, opt);
      out.levels = std::move(r.levels);
      out.warnings = std::move(r.warnings);
    } else {
      for (int l = 0; l < h.size(); ++l) {
        out.levels.push_back(single_level_solve(h, l, opt));
        if (!out.levels.back().converged)
          out.warnings.push_back("level " + std::to_string(l) + ": Arnoldi did not converge within " +
                                 std::to_string(opt.max_restart) + " restarts");
      }
    }
  } catch (const SolverError& e) {
    out.error = e.what();
  }
  for (const LevelResult& lr : out.levels) {
    const auto closure = verify_conjugate_closure(lr.pairs, kClosureTolerance);
    for (const auto& v : closure.violations) out.closure_violations.push_back("level " + std::to_string(lr.level) + ": " + v);
  }
  if (!out.failed() && out.levels.size() == static_cast<std::size_t>(h.size()) && h.size() >= 1)
    out.report = convergence_report(h, out.levels, cfg.k, cfg.eigenfunctions);
  out.seconds = seconds_since(t0);
  return out;
}

}  // namespace detail

/// Runs the configured experiment; never throws for configuration or solver
/// failures (they end up in exit_code and error).
inline RunResult execute(const RunConfig& cfg) {
  RunResult res;
  res.config = cfg;
  std::optional<LevelHierarchy> h;
  try {
    const Mesh initial = cfg.initial_mesh();
    if (const auto problems = validate(initial); !problems.empty())
      throw ConfigError("initial mesh is invalid: " + problems.front());
    const Discretization disc = cfg.discretization();
    check_coefficient_bounds(initial, disc.n, disc.cases);
    const auto t0 = std::chrono::steady_clock::now();
    h.emplace(build_hierarchy(initial, cfg.levels, disc));
    res.build_seconds = detail::seconds_since(t0);
  } catch (const SolverError& e) {
    res.exit_code = kExitSolver;
    res.error = e.what();
    return res;
  } catch (const Error& e) {
    res.exit_code = kExitConfig;
    res.error = e.what();
    return res;
  }

  for (int l = 0; l < h->size(); ++l) {
    const Level& lv = (*h)[l];
    LevelSummary s;
    s.level = l;
    s.h = mesh_size(*lv.mesh);
    s.vertices = static_cast<int>(lv.mesh->num_vertices());
    s.triangles = static_cast<int>(lv.mesh->num_triangles());
    for (Field f : kAllFields) s.dims[static_cast<int>(f)] = lv.space.dim(f);
    s.system_dim = lv.space.system_dim();
    res.levels.push_back(s);
  }

  if (cfg.mode != RunMode::multi) res.methods.push_back(detail::run_method(*h, cfg, false));
  if (cfg.mode != RunMode::single) res.methods.push_back(detail::run_method(*h, cfg, true));

  for (const MethodRun& m : res.methods) {
    for (const auto& w : m.warnings) res.warnings.push_back(m.method + ": " + w);
    for (const auto& v : m.closure_violations) res.warnings.push_back(m.method + ": conjugate closure: " + v);
    if (m.report)
      for (const auto& f : m.report->flags) res.warnings.push_back(m.method + ": " + f);
    if (m.failed()) {
      res.exit_code = kExitSolver;
      if (res.error.empty()) res.error = m.method + ": " + m.error;
    }
  }

  if (res.methods.size() == 2 && !res.methods[0].failed() && !res.methods[1].failed()) {
    const auto& a = res.methods[0].levels.back().pairs;
    const auto& b = res.methods[1].levels.back().pairs;
    double worst = 0.0;
    for (std::size_t j = 0; j < std::min(a.size(), b.size()); ++j)
      worst = std::max(worst, std::abs(a[j].lambda - b[j].lambda) / std::max(std::abs(a[j].lambda), 1e-300));
    res.cross_difference = worst;
    if (worst > kCrossCheckTolerance)
      res.warnings.push_back("single and multi-level eigenvalues differ by up to " + detail::g12(worst) +
                             " (relative) on the finest level");
  }
  return res;
}

inline std::string eigenvalues_csv(const RunResult& r) {
  std::ostringstream out;
  out << "method,level,h,index,re,im,residual\n";
  for (const MethodRun& m : r.methods)
    for (const LevelResult& lr : m.levels)
      for (std::size_t j = 0; j < lr.pairs.size(); ++j) {
        const EigenPair& p = lr.pairs[j];
        out << m.method << ',' << lr.level << ',' << detail::g12(r.levels[static_cast<std::size_t>(lr.level)].h) << ','
            << j + 1 << ',' << detail::g12(p.lambda.real()) << ',' << detail::g12(p.lambda.imag()) << ','
            << detail::g12(p.residual) << '\n';
      }
  return out.str();
}

inline std::string orders_csv(const RunResult& r) {
  std::ostringstream out;
  out << "method,eigenvalue,quantity,i,h,order\n";
  for (const MethodRun& m : r.methods) {
    if (!m.report) continue;
    const ConvergenceReport& rep = *m.report;
    for (const EigenSequence& s : rep.sequences) {
      auto rows = [&](const char* q, const std::vector<std::optional<double>>& ord) {
        for (std::size_t i = 0; i < ord.size(); ++i)
          out << m.method << ',' << s.index + 1 << ',' << q << ',' << i + 1 << ',' << detail::g12(rep.h[i + 1]) << ','
              << (ord[i] ? detail::g12(*ord[i]) : std::string()) << '\n';
      };
      rows("lambda", s.orders);
      rows("u", s.u_orders);
      rows("phi", s.phi_orders);
    }
  }
  return out.str();
}

inline nlohmann::json run_json(const RunResult& r) {
  using nlohmann::json;
  json j;
  j["config"] = echo_config(r.config);
  j["exit_code"] = r.exit_code;
  j["error"] = r.error;
  j["build_seconds"] = r.build_seconds;
  json levels = json::array();
  for (const LevelSummary& s : r.levels) {
    json dims;
    for (Field f : kAllFields) dims[std::string(field_name(f))] = s.dims[static_cast<int>(f)];
    levels.push_back({{"level", s.level}, {"h", s.h}, {"vertices", s.vertices}, {"triangles", s.triangles},
                      {"dofs", dims}, {"system_dim", s.system_dim}});
  }
  j["levels"] = levels;
  json methods = json::array();
  for (const MethodRun& m : r.methods) {
    json lv = json::array();
    for (const LevelResult& lr : m.levels)
      lv.push_back({{"level", lr.level}, {"converged", lr.converged}, {"basis_dim", lr.basis_dim},
                    {"correction_columns", lr.correction_columns}, {"dropped_columns", lr.dropped_columns},
                    {"seconds", lr.seconds}, {"eigenvalues", lr.pairs.size()}});
    json mj{{"method", m.method}, {"seconds", m.seconds}, {"levels", lv}, {"warnings", m.warnings},
            {"closure_violations", m.closure_violations}, {"error", m.error}};
    if (m.report) {
      json seqs = json::array();
      for (const EigenSequence& s : m.report->sequences) {
        json sj{{"eigenvalue", s.index + 1}, {"persistent", s.persistent}, {"real", s.real}};
        if (s.monotone_last3) sj["non_increasing_last3"] = *s.monotone_last3;
        if (s.complex_persists) sj["complex_persists"] = *s.complex_persists;
        seqs.push_back(sj);
      }
      mj["sequences"] = seqs;
      mj["flags"] = m.report->flags;
    }
    methods.push_back(mj);
  }
  j["methods"] = methods;
  j["warnings"] = r.warnings;
  j["solver"] = {{"shift", r.config.shift}, {"tol", r.config.tol}, {"k", r.config.k}, {"seed", r.config.seed},
                 {"max_restart", r.config.max_restart}};
  if (r.cross_difference) j["single_multi_max_relative_difference"] = *r.cross_difference;
  return j;
}

/// Writes every output file into `dir` (created if missing).
inline void write_results(const RunResult& r, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "plotdata");
  auto write = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << text;
  };
  write(dir / "eigenvalues.csv", eigenvalues_csv(r));
  write(dir / "orders.csv", orders_csv(r));
  write(dir / "run.json", run_json(r).dump(2) + "\n");
  write(dir / "config.ini", echo_config(r.config));
  for (const MethodRun& m : r.methods) {
    if (!m.report) continue;
    const ConvergenceReport& rep = *m.report;
    for (const EigenSequence& s : rep.sequences) {
      if (!s.persistent) continue;
      const std::string stem = m.method + "_";
      const std::string idx = std::to_string(s.index + 1);
      std::ostringstream lam;
      lam << "# h |lambda_h - lambda_finest|\n";
      for (std::size_t i = 0; i + 1 < s.values.size(); ++i)
        lam << detail::g12(rep.h[i]) << ' ' << detail::g12(std::abs(*s.values[i] - *s.values.back())) << '\n';
      write(dir / "plotdata" / (stem + "lambda_" + idx + ".dat"), lam.str());
      auto errors = [&](const char* q, const std::vector<double>& e) {
        if (e.empty()) return;
        std::ostringstream o;
        o << "# h |" << q << "_h - " << q << "_finest|_H1\n";
        for (std::size_t i = 0; i < e.size(); ++i) o << detail::g12(rep.h[i]) << ' ' << detail::g12(e[i]) << '\n';
        write(dir / "plotdata" / (stem + q + "_" + idx + ".dat"), o.str());
      };
      errors("u", s.u_errors);
      errors("phi", s.phi_errors);
    }
  }
}

/// Human-readable eigenvalue and order tables.
inline std::string print_table(const RunResult& r) {
  std::ostringstream out;
  char line[160];
  for (const MethodRun& m : r.methods) {
    for (const LevelResult& lr : m.levels) {
      const LevelSummary& s = r.levels[static_cast<std::size_t>(lr.level)];
      std::snprintf(line, sizeof line, "%s  level %d  h = %.6g  unknowns = %d\n", m.method.c_str(), lr.level, s.h,
                    s.system_dim);
      out << line;
      std::snprintf(line, sizeof line, "  %5s  %20s  %20s  %12s\n", "index", "Re", "Im", "residual");
      out << line;
      for (std::size_t j = 0; j < lr.pairs.size(); ++j) {
        const EigenPair& p = lr.pairs[j];
        std::snprintf(line, sizeof line, "  %5zu  %20.12g  %20.12g  %12.3e\n", j + 1, p.lambda.real(), p.lambda.imag(),
                      p.residual);
        out << line;
      }
    }
    if (m.report) {
      out << m.method << "  convergence orders (finest level as reference)\n";
      for (const EigenSequence& s : m.report->sequences) {
        auto row = [&](const char* q, const std::vector<std::optional<double>>& ord) {
          if (ord.empty()) return;
          std::snprintf(line, sizeof line, "  %-7s %2d:", q, s.index + 1);
          out << line;
          for (const auto& o : ord) {
            if (o) std::snprintf(line, sizeof line, " %8.4f", *o);
            else std::snprintf(line, sizeof line, " %8s", "-");
            out << line;
          }
          out << '\n';
        };
        row("lambda", s.orders);
        row("u", s.u_orders);
        row("phi", s.phi_orders);
      }
    }
    if (m.failed()) out << m.method << "  FAILED: " << m.error << '\n';
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

/// Executes, writes outputs (including partial ones after a solver
/// failure) and returns the process exit code.
inline int run(const RunConfig& cfg, std::ostream& log) {
  const RunResult r = execute(cfg);
  if (r.exit_code == kExitConfig) {
    log << "config error: " << r.error << '\n';
    return r.exit_code;
  }
  try {
    write_results(r, cfg.output_dir);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  log << print_table(r);
  if (r.exit_code != kExitOk) log << "solver failure: " << r.error << " (partial results written)\n";
  return r.exit_code;
}

}  // namespace teig
