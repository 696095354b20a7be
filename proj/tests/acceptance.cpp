// Acceptance checks for the solver. Prints one verdict line per criterion
// and exits nonzero if any hard criterion fails. Soft checks (6, 7) report
// their flags but always pass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "teig/assembly.hpp"
#include "teig/config.hpp"
#include "teig/eigensolver.hpp"
#include "teig/linalg/dense.hpp"
#include "teig/multilevel.hpp"
#include "teig/run.hpp"
#include "teig/stability.hpp"

using namespace teig;

namespace {

constexpr double kClosureTol = 1e-6;
constexpr double kOracleTol = 1e-8;
constexpr double kOrderLowM2 = 3.4, kOrderHighM2 = 4.6, kOrderLowM3 = 5.0;
constexpr double kFunctionOrderBelow = 0.5, kFunctionOrderAbove = 0.6;
constexpr double kMultiTol = 1e-5;
constexpr double kCoercivitySlack = 1e-10;
constexpr double kInfSupDrop = 0.20;
constexpr double kNestedTol = 1e-12;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void progress(const std::string& s) { std::cout << "  .. " << s << std::endl; }

/// Every LevelResult computed anywhere in the suite, for the closure check.
struct ClosureLog {
  int spectra = 0;
  std::vector<std::string> violations;
  void add(const std::string& run, const LevelResult& lr) {
    ++spectra;
    for (const auto& v : verify_conjugate_closure(lr.pairs, kClosureTol).violations)
      violations.push_back(run + " level " + std::to_string(lr.level) + ": " + v);
  }
};

LevelHierarchy square_hierarchy(int m, double h0, int meshes, const std::string& n, double ns, double nb) {
  return build_hierarchy(unit_square_mesh(h0), meshes,
                         Discretization::with_degree(m, Coefficient::parse(n), CaseSelector::from_bounds(ns, nb)));
}

std::vector<LevelResult> solve_every_level(const LevelHierarchy& h, const SolveOptions& o, const std::string& run,
                                           ClosureLog& log) {
  std::vector<LevelResult> out;
  for (int l = 0; l < h.size(); ++l) {
    out.push_back(single_level_solve(h, l, o));
    log.add(run, out.back());
  }
  return out;
}

std::vector<double> last_defined(const std::vector<std::optional<double>>& v, std::size_t count) {
  std::vector<double> out;
  for (auto it = v.rbegin(); it != v.rend() && out.size() < count; ++it)
    if (*it) out.insert(out.begin(), **it);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "/" : "") + fmt(v[i], 3);
  return s;
}

/// Criterion 3 on one report: the last two orders of every persistent real
/// sequence must lie in [lo, hi].
Verdict eigenvalue_orders(const ConvergenceReport& rep, double lo, double hi, const std::string& tag) {
  Verdict v{true, ""};
  int checked = 0;
  std::ostringstream bad, all;
  for (const auto& s : rep.sequences) {
    if (!s.real) continue;
    const auto last = last_defined(s.orders, 2);
    if (last.size() < 2) continue;
    ++checked;
    all << " l" << s.index + 1 << "=" << join(last);
    for (double o : last)
      if (o < lo || o > hi) {
        v.pass = false;
        bad << " l" << s.index + 1 << "=" << fmt(o, 3);
      }
  }
  if (checked == 0) v.pass = false;
  v.detail = tag + ": " + std::to_string(checked) + " real sequences;" + all.str();
  if (!v.pass) v.detail += "; outside [" + fmt(lo) + ", " + (std::isinf(hi) ? std::string("inf") : fmt(hi)) + "]:" + bad.str();
  return v;
}

Verdict eigenfunction_orders(const ConvergenceReport& rep, int m, const std::string& tag) {
  Verdict v{true, ""};
  if (rep.sequences.empty() || rep.sequences[0].u_orders.empty()) return {false, tag + ": first eigenfunction not persistent"};
  const auto u = last_defined(rep.sequences[0].u_orders, 2), phi = last_defined(rep.sequences[0].phi_orders, 2);
  const double lo = m - kFunctionOrderBelow, hi = m + kFunctionOrderAbove;
  for (double o : u) v.pass = v.pass && o >= lo && o <= hi;
  for (double o : phi) v.pass = v.pass && o >= lo && o <= hi;
  v.pass = v.pass && u.size() == 2 && phi.size() == 2;
  v.detail = tag + ": u " + join(u) + ", phi " + join(phi) + " in [" + fmt(lo) + ", " + fmt(hi) + "]";
  return v;
}

/// Criterion 10 on one hierarchy: prolonged random vectors evaluate like
/// the coarse ones at 100 random points, per component and level pair.
double nestedness_error(const LevelHierarchy& h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int l = 1; l < h.size(); ++l) {
    const ProductSpace& cs = h[l - 1].space;
    const ProductSpace& fs = h[l].space;
    Vector x(cs.system_dim());
    for (int i = 0; i < x.size(); ++i) x(i) = 2.0 * u(rng) - 1.0;
    const Vector y = h[l].prolongation * x;
    for (Field f : kAllFields) {
      const Vector xc = component(cs, x, f), yf = component(fs, y, f);
      for (int k = 0; k < 100; ++k) {
        const Point2 p{u(rng), u(rng)};
        worst = std::max(worst, std::abs(evaluate(cs.space(f), xc, p) - evaluate(fs.space(f), yf, p)));
      }
    }
  }
  return worst;
}

}  // namespace

int main() {
  std::array<Verdict, 12> v{};
  std::array<bool, 12> soft{};
  soft[6] = soft[7] = true;
  ClosureLog closure;
  std::vector<double> nested_errors;

  const auto n16 = [] { return CaseSelector::from_bounds(16.0, 16.0); };
  SolveOptions opt;  // k = 6, shift 0.5, tol 1e-10

  // 2: Arnoldi against the dense spectrum of the shift-inverted pencil.
  {
    progress("criterion 2: dense oracle at h = 1/4, m = 2");
    const ProductSpace s(std::make_shared<const Mesh>(unit_square_mesh(0.25)), 2, 1, 1);
    const SparseMatrix a = assemble_A(s, Coefficient(16.0), n16());
    const SparseMatrix b = assemble_B(s);
    const ArnoldiResult r = shift_invert_arnoldi(a, b, opt.arnoldi());
    LevelResult lr;
    lr.pairs = r.pairs;
    closure.add("oracle", lr);
    const DenseMatrix t = DenseMatrix(a - opt.shift * b).partialPivLu().solve(DenseMatrix(b));
    std::vector<Complex> all;
    for (Complex nu : dense_eig(t, false).values)
      if (std::abs(nu) > 1e-8) all.push_back(opt.shift + 1.0 / nu);
    std::sort(all.begin(), all.end(), SpectrumOrder{});
    double worst = 0.0;
    bool enough = r.pairs.size() >= 6 && all.size() >= 6;
    for (std::size_t i = 0; enough && i < 6; ++i)
      worst = std::max(worst, std::abs(r.pairs[i].lambda - all[i]) / std::abs(all[i]));
    v[2] = {enough && worst <= kOracleTol, std::to_string(s.total_dim()) + " DOFs, max rel diff " + fmt(worst, 3) +
                                               " (tol " + fmt(kOracleTol) + ")"};
  }

  // 3, 4, 6: single-level solves on nested meshes.
  {
    progress("criteria 3/4/6: m = 2, h0 = 1/4, 5 meshes");
    const LevelHierarchy h2 = square_hierarchy(2, 0.25, 5, "16", 16, 16);
    const auto per2 = solve_every_level(h2, opt, "m=2 orders", closure);
    const ConvergenceReport rep2 = convergence_report(h2, per2, opt.k, 1);
    nested_errors.push_back(nestedness_error(h2, 1));

    progress("criteria 3/4: m = 3, h0 = 1/4, 4 meshes");
    const LevelHierarchy h3 = square_hierarchy(3, 0.25, 4, "16", 16, 16);
    const auto per3 = solve_every_level(h3, opt, "m=3 orders", closure);
    const ConvergenceReport rep3 = convergence_report(h3, per3, opt.k, 1);
    nested_errors.push_back(nestedness_error(h3, 2));

    const Verdict a = eigenvalue_orders(rep2, kOrderLowM2, kOrderHighM2, "m=2");
    const Verdict b = eigenvalue_orders(rep3, kOrderLowM3, INFINITY, "m=3");
    v[3] = {a.pass && b.pass, a.detail + " | " + b.detail};
    const Verdict c = eigenfunction_orders(rep2, 2, "m=2"), d = eigenfunction_orders(rep3, 3, "m=3");
    v[4] = {c.pass && d.pass, c.detail + " | " + d.detail};

    int monotone = 0, flagged = 0;
    for (const auto& s : rep2.sequences)
      if (s.monotone_last3) (*s.monotone_last3 ? monotone : flagged) += 1;
    v[6] = {true, std::to_string(monotone) + " real sequences non-increasing over the last three levels, " +
                      std::to_string(flagged) + " flagged"};
  }

  // 5: Algorithm 1 against the direct solve on the finest of 3 meshes.
  {
    progress("criterion 5: h0 = 1/8, 3 meshes, single vs multi-level");
    const LevelHierarchy h = square_hierarchy(2, 0.125, 3, "16", 16, 16);
    const MultilevelResult ml = algorithm1(h, opt);
    for (const auto& lr : ml.levels) closure.add("multi", lr);
    const LevelResult direct = single_level_solve(h, h.finest(), opt);
    closure.add("single", direct);
    nested_errors.push_back(nestedness_error(h, 3));
    double worst = 0.0;
    std::string diffs;
    const bool enough = ml.finest().pairs.size() >= 6 && direct.pairs.size() >= 6;
    for (std::size_t j = 0; enough && j < 6; ++j) {
      const double d = std::abs(ml.finest().pairs[j].lambda - direct.pairs[j].lambda) / std::abs(direct.pairs[j].lambda);
      worst = std::max(worst, d);
      diffs += (j ? " " : "") + fmt(d, 2);
    }
    v[5] = {enough && worst <= kMultiTol,
            "max rel diff " + fmt(worst, 3) + " (tol " + fmt(kMultiTol) + "); per eigenvalue " + diffs};
  }

  // 7: complex pair persistence with a variable coefficient.
  {
    progress("criterion 7: n = x1^2 + x2^2 + 4, h0 = 1/8, 3 meshes");
    const LevelHierarchy h = square_hierarchy(2, 0.125, 3, "x1^2 + x2^2 + 4", 4.0, 6.0);
    const MultilevelResult ml = algorithm1(h, opt);
    for (const auto& lr : ml.levels) closure.add("variable n", lr);
    nested_errors.push_back(nestedness_error(h, 4));
    const ConvergenceReport rep = convergence_report(h, ml.levels, opt.k, 0);
    std::string detail;
    int pairs = 0, lost = 0;
    for (const auto& s : rep.sequences) {
      if (!s.complex_persists || s.values.front()->imag() < 0.0) continue;
      ++pairs;
      if (!*s.complex_persists) ++lost;
      detail += " |Im| " + fmt(std::abs(s.values.front()->imag())) + " -> " + fmt(std::abs(s.values.back()->imag()));
    }
    v[7] = {true, pairs == 0 ? std::string("no complex pair among the first 6 at the coarsest level")
                             : std::to_string(pairs) + " pair(s), " + std::to_string(lost) + " flagged;" + detail};
  }

  // 8: sampled coercivity on two meshes, constant and variable n.
  {
    progress("criterion 8: coercivity samples");
    bool ok = true;
    std::string detail;
    for (double hh : {0.25, 0.125}) {
      const ProductSpace s(std::make_shared<const Mesh>(unit_square_mesh(hh)), 2, 1, 1);
      const auto r = sample_coercivity(s, assemble_A(s, Coefficient(16.0), n16()), 16.0, 16.0, 200, 8);
      const auto cs = CaseSelector::from_bounds(4.0, 6.0);
      const auto rv = sample_coercivity(s, assemble_A(s, Coefficient::parse("x1^2 + x2^2 + 4"), cs), 4.0, 6.0, 200, 9);
      ok = ok && r.min_margin >= -kCoercivitySlack * r.max_lhs && rv.min_margin >= -kCoercivitySlack * rv.max_lhs;
      detail += (detail.empty() ? "" : "; ") + std::string("h=") + fmt(hh) + " min margin " + fmt(r.min_margin, 3) +
                " (n=16, c=" + fmt(r.constant, 3) + "), " + fmt(rv.min_margin, 3) + " (variable n)";
    }
    v[8] = {ok, "200 samples each; " + detail};
  }

  // 9: inf-sup estimates on three nested meshes.
  {
    progress("criterion 9: inf-sup estimates");
    std::vector<double> low, high;
    std::string zero_high;
    for (double hh : {0.25, 0.125, 0.0625}) {
      const auto mesh = std::make_shared<const Mesh>(unit_square_mesh(hh));
      const ProductSpace s1(mesh, 2, 1, 1), s2(mesh, 2, 2, 1);
      low.push_back(inf_sup_constant(s1, assemble_A(s1, Coefficient(16.0), n16())).constant);
      const auto e2 = inf_sup_constant(s2, assemble_A(s2, Coefficient(16.0), n16()));
      high.push_back(e2.constant);
      zero_high += (zero_high.empty() ? "" : "/") + std::to_string(e2.zero_modes);
    }
    const double drop = (low.front() - low.back()) / low.front();
    v[9] = {drop < kInfSupDrop, "sigma degree m-1: " + join(low) + " (drop " + fmt(100 * drop, 3) +
                                    "%, limit 20%); sigma degree m (recorded): " + join(high) + ", zero modes " + zero_high};
  }

  // 10: nestedness over every hierarchy above.
  {
    const double worst = *std::max_element(nested_errors.begin(), nested_errors.end());
    v[10] = {worst <= kNestedTol, std::to_string(nested_errors.size()) + " hierarchies, 7 components, 100 points per "
                                      "level pair; max deviation " + fmt(worst, 3)};
  }

  // 11: determinism of the written eigenvalue table.
  {
    progress("criterion 11: repeated runs");
    RunConfig c;
    c.h0 = 0.25;
    c.levels = 3;
    c.mode = RunMode::both;
    const RunResult r1 = execute(c), r2 = execute(c);
    for (const auto& m : r1.methods)
      for (const auto& lr : m.levels) closure.add("repeat " + m.method, lr);
    const std::string a = eigenvalues_csv(r1), b = eigenvalues_csv(r2);
    v[11] = {r1.exit_code == kExitOk && a == b,
             std::to_string(std::count(a.begin(), a.end(), '\n') - 1) + " rows, " + (a == b ? "identical" : "different")};
  }

  v[1] = {closure.violations.empty(), std::to_string(closure.spectra) + " spectra checked at tol 1e-6" +
                                          (closure.violations.empty() ? "" : "; " + closure.violations.front())};

  bool all = true;
  for (int i = 1; i <= 11; ++i) {
    std::cout << (v[i].pass ? "[PASS]" : "[FAIL]") << " criterion " << i << (soft[i] ? " (soft)" : "") << ": "
              << v[i].detail << "\n";
    all = all && v[i].pass;
  }
  return all ? 0 : 1;
}
