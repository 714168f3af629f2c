// Command-line driver: mesh, run, steady, experiment1, experiment2.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavpend/config.hpp"
#include "cavpend/driver.hpp"
#include "cavpend/errors.hpp"
#include "cavpend/mesh.hpp"
#include "cavpend/steady.hpp"

namespace {

using namespace cavpend;

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct ConfigFlags {
  std::string file;
  std::vector<std::string> sets;
  std::optional<double> dt, t_end, target_h;
  std::optional<std::string> out;

  void attach(CLI::App* app, bool with_out) {
    app->add_option("-c,--config", file, "INI config file or a run sidecar (.json)");
    app->add_option("--set", sets, "Override a key, section.key=value (repeatable)");
    app->add_option("--dt", dt, "Time step");
    app->add_option("--t-end", t_end, "Final time");
    app->add_option("--target-h", target_h, "Target mesh size");
    if (with_out) app->add_option("-o,--out", out, "Output CSV path");
  }

  // Preset or defaults, then the config file, then --set, then dedicated flags.
  RunConfig resolve(RunConfig base) const {
    RunConfig c = file.empty() ? std::move(base) : load_config(file, std::move(base));
    for (const auto& s : sets) apply_override(c, s);
    if (dt) c.dt = *dt;
    if (t_end) c.t_end = *t_end;
    if (target_h) c.target_h = *target_h;
    if (out) c.csv = *out;
    c.validate();
    return c;
  }
};

void print_mesh_stats(const MeshStats& s) {
  std::printf("vertices=%d elements=%d faces=%d boundary_faces=%d h_max=%.6g area=%.17g\n", s.vertices, s.elements,
              s.faces, s.boundary_faces, s.h_max, s.area);
}

int cmd_mesh(const ConfigFlags& flags, const std::string& save) {
  const RunConfig c = flags.resolve({});
  const auto mesh = build_mesh(c);
  print_mesh_stats(mesh_stats(*mesh));
  if (!save.empty()) save_mesh(*mesh, save);
  return 0;
}

int cmd_run(const ConfigFlags& flags) {
  RunConfig c = flags.resolve({});
  if (c.csv.empty()) c.csv = "run.csv";
  const RunResult r = run(c);
  std::printf("steps=%ld t=%.17g damping_metric=%.17g max_mass_drift=%.3e max_gravity_drift=%.3e min_density=%.17g%s\n",
              r.steps, r.t_final, r.damping_metric, r.max_mass_drift, r.max_gravity_drift, r.min_density,
              r.rest_reached ? " rest_reached" : "");
  std::printf("wrote %s and %s\n", c.csv.c_str(), sidecar_path(c.csv).c_str());
  return 0;
}

int cmd_steady(const ConfigFlags& flags, int n_scan) {
  const RunConfig c = flags.resolve({});
  const auto mesh = build_mesh(c);
  const Cavity cavity = Cavity::from_mesh(mesh, c.rho0 * mesh->total_area());
  const Vec2 l2 = c.geometry.first_moment();
  const Vec3 l(l2.x(), l2.y(), 0.0);
  const EquilibriumReport report = find_equilibria(cavity, l, c.gas, 1.0, n_scan);
  if (report.degenerate) {
    std::fprintf(stderr, "degenerate: the residual vanishes identically (continuum of equilibria)\n");
    return 0;
  }
  const MinimizerSelection best = select_minimizer(report.states);
  if (best.tie) std::fprintf(stderr, "warning: several equilibria share the minimal energy\n");
  std::printf("alpha,c,d,energy,is_minimizer\n");
  for (std::size_t i = 0; i < report.states.size(); ++i) {
    const SteadyState& s = report.states[i];
    std::printf("%.17g,%.17g,%.17g,%.17g,%d\n", s.alpha, s.c, s.d, s.energy, i == best.index ? 1 : 0);
  }
  return 0;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values: cannot parse '" + item + "' as a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void print_rows(const std::vector<ExperimentRow>& rows, const std::filesystem::path& summary) {
  for (const auto& r : rows) {
    std::printf("%-24s damping_metric=%.17g", r.label.c_str(), r.damping_metric);
    if (r.metric_richardson == r.metric_richardson) std::printf(" richardson=%.17g", r.metric_richardson);
    std::printf(" min_density=%.6g\n", r.min_density);
  }
  std::printf("wrote %s\n", summary.c_str());
}

int cmd_experiment1(const ConfigFlags& flags, const std::string& sweep_text, const std::string& values_text,
                    const std::string& out_dir, const ExperimentOptions& options) {
  const Sweep sweep = parse_sweep(sweep_text);
  const std::vector<double> values = values_text.empty() ? default_sweep_values(sweep) : parse_values(values_text);
  const RunConfig base = flags.resolve(experiment_base());
  const auto cells = experiment1_cells(sweep, values, base, out_dir);
  const auto rows = run_experiment(cells, options);
  const std::filesystem::path summary = std::filesystem::path(out_dir) / ("experiment1_" + sweep_name(sweep) + "_summary.csv");
  write_summary(summary, rows);
  print_rows(rows, summary);
  return 0;
}

int cmd_experiment2(const ConfigFlags& flags, const std::string& out_dir, const ExperimentOptions& options) {
  const RunConfig base = flags.resolve(experiment_base());
  const auto rows = run_experiment(experiment2_cells(base, out_dir), options);
  const std::filesystem::path summary = std::filesystem::path(out_dir) / "experiment2_summary.csv";
  write_summary(summary, rows);
  print_rows(rows, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pendulum with a gas-filled cavity: simulation and equilibrium analysis"};
  app.require_subcommand(1);

  ConfigFlags mesh_flags, run_flags, steady_flags, e1_flags, e2_flags;
  std::string mesh_save;
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate or load the cavity mesh and print its statistics");
  mesh_flags.attach(mesh_cmd, false);
  mesh_cmd->add_option("-o,--out", mesh_save, "Write the mesh to this file");

  auto* run_cmd = app.add_subcommand("run", "Simulate one configuration and write CSV plus sidecar");
  run_flags.attach(run_cmd, true);

  int n_scan = 360;
  auto* steady_cmd = app.add_subcommand("steady", "Print the equilibria as alpha,c,d,energy,is_minimizer");
  steady_flags.attach(steady_cmd, false);
  steady_cmd->add_option("--n-scan", n_scan, "Scan points in [0, 2 pi)")->check(CLI::PositiveNumber);

  std::string sweep, values, e1_dir = "experiment1", e2_dir = "experiment2";
  ExperimentOptions e1_opts, e2_opts;
  auto* e1_cmd = app.add_subcommand("experiment1", "Damping sweep over density ratio, gas parameter or length");
  e1_flags.attach(e1_cmd, false);
  e1_cmd->add_option("--sweep", sweep, "density-ratio | gas-parameter | length")->required();
  e1_cmd->add_option("--values", values, "Comma-separated sweep values");
  e1_cmd->add_option("--out-dir", e1_dir, "Output directory");
  e1_cmd->add_option("-j,--jobs", e1_opts.jobs, "Worker threads (0: hardware concurrency)");
  e1_cmd->add_flag("--richardson", e1_opts.richardson, "Also run at dt/2 and report the extrapolated metric");

  auto* e2_cmd = app.add_subcommand("experiment2", "Incompressible versus compressible at a = 0.1, 20, 100");
  e2_flags.attach(e2_cmd, false);
  e2_cmd->add_option("--out-dir", e2_dir, "Output directory");
  e2_cmd->add_option("-j,--jobs", e2_opts.jobs, "Worker threads (0: hardware concurrency)");
  e2_cmd->add_flag("--richardson", e2_opts.richardson, "Also run at dt/2 and report the extrapolated metric");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*mesh_cmd) return cmd_mesh(mesh_flags, mesh_save);
    if (*run_cmd) return cmd_run(run_flags);
    if (*steady_cmd) return cmd_steady(steady_flags, n_scan);
    if (*e1_cmd) return cmd_experiment1(e1_flags, sweep, values, e1_dir, e1_opts);
    if (*e2_cmd) return cmd_experiment2(e2_flags, e2_dir, e2_opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    std::fprintf(stderr, "invalid parameter: %s\n", e.what());
    return kExitConfig;
  } catch (const MeshError& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
