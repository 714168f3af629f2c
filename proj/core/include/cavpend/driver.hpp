#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cavpend/config.hpp"
#include "cavpend/fem.hpp"
#include "cavpend/mesh.hpp"

namespace cavpend {

/// One CSV row: `step,t,theta,omega,g1,g2,mass,energy,min_density,max_speed`.
/// `max_speed` is the largest face value of |u - omega e3 x x|.
struct StepRecord {
  long step = 0;
  double t = 0.0;
  double theta = 0.0;
  double omega = 0.0;
  Vec2 g = Vec2::Zero();
  double mass = 0.0;
  double energy = 0.0;
  double min_density = 0.0;
  double max_speed = 0.0;
  /// max(|omega|, ||u - omega e3 x x||_L2); not written to the CSV.
  double rest_measure = 0.0;
  /// Incompressible runs only (NaN otherwise): max_K |div u| on the element
  /// and the pressure integral.
  double max_divergence = std::numeric_limits<double>::quiet_NaN();
  double pressure_integral = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr const char* kCsvHeader = "step,t,theta,omega,g1,g2,mass,energy,min_density,max_speed";

inline constexpr double kCourantWarning = 0.5;

struct MeshStats {
  int vertices = 0;
  int elements = 0;
  int faces = 0;
  int boundary_faces = 0;
  double h_max = 0.0;
  double area = 0.0;
};

MeshStats mesh_stats(const Mesh& mesh);

struct RunResult {
  long steps = 0;
  double t_final = 0.0;
  /// max |theta| over steps with t >= 0.8 t_end.
  double damping_metric = 0.0;
  double max_mass_drift = 0.0;     // relative, over every step
  double max_gravity_drift = 0.0;  // ||g| - |g(0)||, over every step
  double min_density = 0.0;        // over every step
  /// Incompressible runs: maxima over every solve of max_K |div u| and |int p|.
  double max_divergence = 0.0;
  double max_pressure_integral = 0.0;
  /// max over steps of max_speed * dt / h_max; a warning goes to stderr the
  /// first time it exceeds kCourantWarning.
  double max_courant = 0.0;
  bool rest_reached = false;
  double wall_seconds = 0.0;
  MeshStats mesh;
  std::shared_ptr<const Mesh> mesh_ptr;
  /// Final fields (density is rho_c everywhere for the incompressible solver).
  P0Field final_rho;
  CRField final_u;
  StepRecord final_record;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Builds the cavity mesh of a config: the file if given, else a disk of
/// radius R0 centered at (L, 0) with the target size.
std::shared_ptr<const Mesh> build_mesh(const RunConfig& config);

/// Validates, builds the mesh, projects the initial data and steps to t_end
/// (or until the rest tolerance is met). When `config.csv` is set, writes the
/// CSV (every `stride` steps plus the last) and a sidecar `<csv>.json` with
/// the config echo, mesh stats, wall time and summary. The observer sees
/// every step including step 0. On a solver failure the rows so far and a
/// sidecar with status "solver_failure" are flushed, then the error is rethrown.
RunResult run(const RunConfig& config, const StepObserver& observer = {});

std::filesystem::path sidecar_path(const std::filesystem::path& csv);

// ---- experiments ---------------------------------------------------------

enum class Sweep { density_ratio, gas_parameter, length };

Sweep parse_sweep(const std::string& name);
std::string sweep_name(Sweep sweep);
std::vector<double> default_sweep_values(Sweep sweep);

/// Base configuration of the experiment presets: the default run with
/// t_end = 15 (metric window [12, 15]).
RunConfig experiment_base();

struct ExperimentCell {
  std::string label;
  double value = 0.0;
  RunConfig config;
};

/// Cells of one Experiment-1 sweep. Fixed complements: a = 10, L = 0.4 for the
/// density-ratio sweep; R = 1, L = 0.4 for the gas-parameter sweep; R = 1,
/// a = 10 for the length sweep. R sets the body density as R * rho0.
std::vector<ExperimentCell> experiment1_cells(Sweep sweep, const std::vector<double>& values, const RunConfig& base,
                                              const std::filesystem::path& out_dir);

/// One incompressible cell (rho_c = rho0) and compressible cells at a in {0.1, 20, 100}.
std::vector<ExperimentCell> experiment2_cells(const RunConfig& base, const std::filesystem::path& out_dir);

struct ExperimentRow {
  std::string label;
  double value = 0.0;
  std::string solver;
  double a = 0.0;
  double length = 0.0;
  double density_ratio = 0.0;
  double damping_metric = 0.0;
  /// 2 m(dt/2) - m(dt) when requested, NaN otherwise.
  double metric_richardson = 0.0;
  double min_density = 0.0;
  double max_mass_drift = 0.0;
  double max_gravity_drift = 0.0;
  double max_divergence = 0.0;
  double max_pressure_integral = 0.0;
  double wall_seconds = 0.0;
  std::string csv;
};

struct ExperimentOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned jobs = 0;
  /// Also run every cell at dt/2 and report the extrapolated metric.
  bool richardson = false;
};

/// Runs the cells on a bounded worker pool. Rows come back in cell order and
/// do not depend on the number of workers. The first failing cell's error
/// (in cell order) is rethrown after all workers finish.
std::vector<ExperimentRow> run_experiment(const std::vector<ExperimentCell>& cells, const ExperimentOptions& options);

void write_summary(const std::filesystem::path& path, const std::vector<ExperimentRow>& rows);

}  // namespace cavpend
