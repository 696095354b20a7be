#pragma once
// Run configuration: a line-oriented key = value file with sections
// [domain], [coefficient], [discretization], [solver] and [output].
// Unknown sections and keys are errors.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "teig/coefficient.hpp"
#include "teig/error.hpp"
#include "teig/mesh.hpp"
#include "teig/multilevel.hpp"

namespace teig {

enum class RunMode { single, multi, both };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::single: return "single";
    case RunMode::multi: return "multi";
    default: return "both";
  }
}

struct RunConfig {
  // [domain]
  std::string domain = "unit_square";  // built-in name, "polygon" or "mesh"
  std::string mesh_path;               // domain = mesh
  std::vector<Point2> vertices;        // domain = polygon
  std::optional<double> h0;            // built-in and polygon domains

  // [coefficient]
  std::string n_expression = "16";
  std::optional<double> n_s, n_b;      // default to n for a constant n
  std::optional<Case> forced_case;     // empty: chosen from the bounds

  // [discretization]
  int m = 2;
  std::optional<int> sigma_degree;     // default m - 1
  std::optional<int> p_degree;         // default m - 1
  int levels = 3;                      // number of meshes

  // [solver]
  int k = 6;
  double shift = 0.5;
  double tol = 1e-10;
  int max_restart = 50;
  std::uint64_t seed = ArnoldiOptions{}.seed;
  RunMode mode = RunMode::single;

  // [output]
  std::string output_dir = "teig-out";
  int eigenfunctions = 1;              // leading eigenfunctions with error orders

  double initial_h() const { return h0 ? *h0 : (m == 2 ? 0.125 : 0.25); }
  int resolved_sigma_degree() const { return sigma_degree.value_or(m - 1); }
  int resolved_p_degree() const { return p_degree.value_or(m - 1); }

  Coefficient coefficient() const { return parse_coefficient(n_expression); }

  CaseSelector cases() const {
    const Coefficient n = coefficient();
    double lo, hi;
    if (n_s && n_b) {
      lo = *n_s;
      hi = *n_b;
    } else if (n.is_constant()) {
      const double v = n({0.0, 0.0});
      lo = n_s.value_or(v);
      hi = n_b.value_or(v);
    } else {
      throw ConfigError("[coefficient] n_s and n_b must be declared for a position-dependent n");
    }
    return forced_case ? CaseSelector::make(*forced_case, lo, hi) : CaseSelector::from_bounds(lo, hi);
  }

  Mesh initial_mesh() const {
    if (domain == "mesh") return load_mesh(mesh_path);
    if (domain == "polygon") return polygon_mesh(vertices, initial_h());
    return build_builtin_domain(domain, initial_h());
  }

  Discretization discretization() const {
    return Discretization{m, resolved_sigma_degree(), resolved_p_degree(), coefficient(), cases()};
  }

  SolveOptions solve_options() const {
    SolveOptions o;
    o.k = k;
    o.shift = shift;
    o.tol = tol;
    o.max_restart = max_restart;
    o.seed = seed;
    return o;
  }
};

namespace detail {

inline double parse_real(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v))
    throw ConfigError(key + ": '" + text + "' is not a finite number");
  return v;
}

template <class Int>
Int parse_integer(const std::string& key, const std::string& text) {
  const std::string t = boost::algorithm::trim_copy(text);
  Int v{};
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": '" + text + "' is not an integer");
  return v;
}

/// "m-1", "m" or an explicit integer.
inline int parse_degree(const std::string& key, const std::string& text, int m) {
  std::string t = boost::algorithm::erase_all_copy(text, " ");
  if (t == "m") return m;
  if (t == "m-1") return m - 1;
  return parse_integer<int>(key, text);
}

/// "x y, x y, ..." (pairs separated by ',' or ';').
inline std::vector<Point2> parse_vertices(const std::string& key, const std::string& text) {
  std::vector<std::string> items;
  boost::algorithm::split(items, text, boost::is_any_of(",;"));
  std::vector<Point2> out;
  for (const std::string& item : items) {
    std::istringstream in(item);
    std::string a, b, extra;
    if (!(in >> a >> b) || (in >> extra))
      throw ConfigError(key + ": vertex '" + boost::algorithm::trim_copy(item) + "' is not an 'x y' pair");
    out.push_back({parse_real(key, a), parse_real(key, b)});
  }
  return out;
}

inline std::string shortest(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace detail

/// Parses a configuration. Relative mesh paths resolve against `base_dir`.
inline RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::map<std::string, std::set<std::string>> known = {
      {"domain", {"name", "mesh", "vertices", "h0"}},
      {"coefficient", {"n", "n_s", "n_b", "case"}},
      {"discretization", {"m", "sigma_degree", "p_degree", "levels"}},
      {"solver", {"k", "shift", "tol", "max_restart", "seed", "mode"}},
      {"output", {"directory", "eigenfunctions"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = known.find(section);
    if (it == known.end()) {
      if (!body.data().empty()) throw ConfigError("config key '" + section + "' lies outside any section");
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& kv : body)
      if (!it->second.count(kv.first)) throw ConfigError("unknown config key '" + kv.first + "' in [" + section + "]");
  }
  auto get = [&](const char* section, const char* key) -> std::optional<std::string> {
    const auto s = tree.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(key);
    if (v) return boost::algorithm::trim_copy(*v);
    return std::nullopt;
  };
  auto name = [](const char* section, const char* key) { return std::string(section) + "." + key; };

  RunConfig c;
  // [discretization] first: degree keywords depend on m.
  if (auto v = get("discretization", "m")) c.m = detail::parse_integer<int>(name("discretization", "m"), *v);
  if (c.m != 2 && c.m != 3) throw ConfigError("discretization.m must be 2 or 3, got " + std::to_string(c.m));
  if (auto v = get("discretization", "sigma_degree"))
    c.sigma_degree = detail::parse_degree(name("discretization", "sigma_degree"), *v, c.m);
  if (auto v = get("discretization", "p_degree"))
    c.p_degree = detail::parse_degree(name("discretization", "p_degree"), *v, c.m);
  if (c.sigma_degree && *c.sigma_degree != c.m - 1 && *c.sigma_degree != c.m)
    throw ConfigError("discretization.sigma_degree must be m-1 or m");
  if (c.p_degree && *c.p_degree != c.m - 1 && *c.p_degree != c.m)
    throw ConfigError("discretization.p_degree must be m-1 or m");
  if (auto v = get("discretization", "levels")) c.levels = detail::parse_integer<int>(name("discretization", "levels"), *v);
  if (c.levels < 1) throw ConfigError("discretization.levels must be >= 1, got " + std::to_string(c.levels));

  if (auto v = get("domain", "name")) c.domain = *v;
  if (auto v = get("domain", "h0")) {
    c.h0 = detail::parse_real(name("domain", "h0"), *v);
    if (!(*c.h0 > 0.0)) throw ConfigError("domain.h0 must be positive");
  }
  if (auto v = get("domain", "mesh")) {
    std::filesystem::path p(*v);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    c.mesh_path = p.lexically_normal().string();
  }
  if (auto v = get("domain", "vertices")) c.vertices = detail::parse_vertices(name("domain", "vertices"), *v);
  if (c.domain == "mesh") {
    if (c.mesh_path.empty()) throw ConfigError("domain.name = mesh needs domain.mesh");
    if (c.h0) throw ConfigError("domain.h0 has no effect with a mesh file; remove it");
  } else if (!c.mesh_path.empty()) {
    throw ConfigError("domain.mesh is only allowed with domain.name = mesh");
  }
  if (c.domain == "polygon") {
    check_simple_polygon(c.vertices);
  } else if (!c.vertices.empty()) {
    throw ConfigError("domain.vertices is only allowed with domain.name = polygon");
  }
  if (c.domain != "mesh" && c.domain != "polygon" && c.domain != "unit_square" && c.domain != "right_triangle" &&
      c.domain != "l_shape")
    throw ConfigError("unknown domain.name '" + c.domain + "' (unit_square, right_triangle, l_shape, polygon, mesh)");

  if (auto v = get("coefficient", "n")) c.n_expression = *v;
  if (auto v = get("coefficient", "n_s")) c.n_s = detail::parse_real(name("coefficient", "n_s"), *v);
  if (auto v = get("coefficient", "n_b")) c.n_b = detail::parse_real(name("coefficient", "n_b"), *v);
  if (auto v = get("coefficient", "case")) {
    if (*v == "I") c.forced_case = Case::I;
    else if (*v == "II") c.forced_case = Case::II;
    else if (*v != "auto") throw ConfigError("coefficient.case must be auto, I or II, got '" + *v + "'");
  }

  if (auto v = get("solver", "k")) c.k = detail::parse_integer<int>(name("solver", "k"), *v);
  if (c.k < 1) throw ConfigError("solver.k must be >= 1, got " + std::to_string(c.k));
  if (auto v = get("solver", "shift")) c.shift = detail::parse_real(name("solver", "shift"), *v);
  if (auto v = get("solver", "tol")) c.tol = detail::parse_real(name("solver", "tol"), *v);
  if (!(c.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (auto v = get("solver", "max_restart")) c.max_restart = detail::parse_integer<int>(name("solver", "max_restart"), *v);
  if (c.max_restart < 1) throw ConfigError("solver.max_restart must be >= 1");
  if (auto v = get("solver", "seed")) c.seed = detail::parse_integer<std::uint64_t>(name("solver", "seed"), *v);
  if (auto v = get("solver", "mode")) {
    if (*v == "single") c.mode = RunMode::single;
    else if (*v == "multi") c.mode = RunMode::multi;
    else if (*v == "both") c.mode = RunMode::both;
    else throw ConfigError("solver.mode must be single, multi or both, got '" + *v + "'");
  }
  if (c.mode != RunMode::single && c.levels < 2)
    throw ConfigError("solver.mode = " + std::string(to_string(c.mode)) + " needs discretization.levels >= 2");

  if (auto v = get("output", "directory")) c.output_dir = *v;
  if (c.output_dir.empty()) throw ConfigError("output.directory must not be empty");
  if (auto v = get("output", "eigenfunctions"))
    c.eigenfunctions = detail::parse_integer<int>(name("output", "eigenfunctions"), *v);
  if (c.eigenfunctions < 0 || c.eigenfunctions > c.k) throw ConfigError("output.eigenfunctions must lie in [0, k]");

  (void)c.coefficient();  // parse errors surface here
  (void)c.cases();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::filesystem::path(path).parent_path());
}

/// Complete configuration with every default made explicit; parsing the
/// echo yields the same configuration.
inline std::string echo_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[domain]\nname = " << c.domain << "\n";
  if (c.domain == "mesh") out << "mesh = " << c.mesh_path << "\n";
  if (c.domain == "polygon") {
    out << "vertices = ";
    for (std::size_t i = 0; i < c.vertices.size(); ++i)
      out << (i ? ", " : "") << detail::shortest(c.vertices[i].x1) << ' ' << detail::shortest(c.vertices[i].x2);
    out << "\n";
  }
  if (c.domain != "mesh") out << "h0 = " << detail::shortest(c.initial_h()) << "\n";
  const CaseSelector cs = c.cases();
  out << "\n[coefficient]\nn = " << c.n_expression << "\nn_s = " << detail::shortest(cs.n_s)
      << "\nn_b = " << detail::shortest(cs.n_b) << "\ncase = " << to_string(cs.which) << "\n";
  out << "\n[discretization]\nm = " << c.m << "\nsigma_degree = " << c.resolved_sigma_degree()
      << "\np_degree = " << c.resolved_p_degree() << "\nlevels = " << c.levels << "\n";
  out << "\n[solver]\nk = " << c.k << "\nshift = " << detail::shortest(c.shift) << "\ntol = " << detail::shortest(c.tol)
      << "\nmax_restart = " << c.max_restart << "\nseed = " << c.seed << "\nmode = " << to_string(c.mode) << "\n";
  out << "\n[output]\ndirectory = " << c.output_dir << "\neigenfunctions = " << c.eigenfunctions << "\n";
  return out.str();
}

/// Throws ConfigError if n leaves [n_s, n_b] at a vertex, edge midpoint or
/// centroid of `mesh`.
inline void check_coefficient_bounds(const Mesh& mesh, const Coefficient& n, const CaseSelector& cs) {
  auto check = [&](Point2 x) {
    const double v = n(x);
    const double slack = 1e-12 * std::max(1.0, std::abs(v));
    if (!std::isfinite(v) || v < cs.n_s - slack || v > cs.n_b + slack)
      throw ConfigError("n(" + detail::shortest(x.x1) + ", " + detail::shortest(x.x2) + ") = " + detail::shortest(v) +
                        " lies outside the declared bounds [" + detail::shortest(cs.n_s) + ", " +
                        detail::shortest(cs.n_b) + "]");
  };
  for (const Point2& p : mesh.vertices) check(p);
  for (const auto& t : mesh.triangles) {
    const Point2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    check(midpoint(a, b));
    check(midpoint(b, c));
    check(midpoint(c, a));
    check({(a.x1 + b.x1 + c.x1) / 3.0, (a.x2 + b.x2 + c.x2) / 3.0});
  }
}

}  // namespace teig
