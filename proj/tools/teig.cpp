// teig: command-line front end.
//   teig run <config>            run an experiment, write results
//   teig check <config>          validate a config without solving
//   teig mesh-info <meshfile>    mesh statistics and validation
//   teig refine <meshfile> <n>   n red refinements, written to -o
// Exit codes: 0 success, 2 config error, 3 solver failure.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "teig/config.hpp"
#include "teig/fespace.hpp"
#include "teig/mesh.hpp"
#include "teig/run.hpp"

namespace {

int cmd_check(const std::string& path) {
  const teig::RunConfig cfg = teig::load_config(path);
  const teig::Mesh mesh = cfg.initial_mesh();
  if (const auto problems = teig::validate(mesh); !problems.empty())
    throw teig::ConfigError("initial mesh is invalid: " + problems.front());
  const teig::Discretization disc = cfg.discretization();
  teig::check_coefficient_bounds(mesh, disc.n, disc.cases);
  const auto shared = std::make_shared<const teig::Mesh>(mesh);
  const teig::ProductSpace space(shared, disc.m, disc.sigma_degree, disc.p_degree);
  std::cout << "config ok: case " << teig::to_string(disc.cases.which) << ", " << cfg.levels << " level(s), "
            << "level 0 has " << mesh.num_triangles() << " triangles and " << space.system_dim() << " unknowns\n\n"
            << teig::echo_config(cfg);
  return teig::kExitOk;
}

int cmd_mesh_info(const std::string& path) {
  const teig::Mesh mesh = teig::load_mesh(path);
  double area = 0.0;
  for (const auto& t : mesh.triangles)
    area += 0.5 * teig::signed_area2(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  const auto problems = teig::validate(mesh);
  std::cout << "vertices        " << mesh.num_vertices() << "\n"
            << "triangles       " << mesh.num_triangles() << "\n"
            << "boundary edges  " << mesh.boundary_edges.size() << "\n"
            << "edges           " << teig::build_edges(mesh).num_edges() << "\n"
            << "h (max edge)    " << teig::mesh_size(mesh) << "\n"
            << "area            " << area << "\n"
            << "valid           " << (problems.empty() ? "yes" : "no") << "\n";
  for (const auto& p : problems) std::cout << "  " << p << "\n";
  return problems.empty() ? teig::kExitOk : teig::kExitConfig;
}

int cmd_refine(const std::string& path, int levels, const std::string& output) {
  if (levels < 0) throw teig::ConfigError("refinement count must be >= 0");
  teig::Mesh mesh = teig::load_mesh(path);
  for (int i = 0; i < levels; ++i) mesh = teig::refine_red(mesh);
  if (output.empty() || output == "-") teig::write_mesh(std::cout, mesh);
  else teig::save_mesh(mesh, output);
  return teig::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission eigenvalues by a mixed finite element method with single- and multi-level solvers"};
  app.require_subcommand(1);

  std::string config_path, mesh_path, output, output_dir;
  int levels = 1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("-o,--output", output_dir, "Override [output] directory");
  run->add_flag("-q,--quiet", quiet, "Do not print the result tables");

  auto* check = app.add_subcommand("check", "Validate a config file (dry run)");
  check->add_option("config", config_path, "Config file")->required();

  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics");
  info->add_option("meshfile", mesh_path, "Mesh file")->required();

  auto* refine = app.add_subcommand("refine", "Red-refine a mesh file");
  refine->add_option("meshfile", mesh_path, "Mesh file")->required();
  refine->add_option("levels", levels, "Number of refinements")->required();
  refine->add_option("-o,--output", output, "Output mesh file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : teig::kExitConfig;
  }

  try {
    if (*run) {
      teig::RunConfig cfg = teig::load_config(config_path);
      if (!output_dir.empty()) cfg.output_dir = output_dir;
      std::ostringstream sink;
      const int code = teig::run(cfg, quiet ? static_cast<std::ostream&>(sink) : std::cout);
      if (quiet && code != teig::kExitOk) std::cerr << sink.str();
      return code;
    }
    if (*check) return cmd_check(config_path);
    if (*info) return cmd_mesh_info(mesh_path);
    if (*refine) return cmd_refine(mesh_path, levels, output);
  } catch (const teig::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return teig::kExitSolver;
  } catch (const teig::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return teig::kExitConfig;
  }
  return teig::kExitOk;
}
