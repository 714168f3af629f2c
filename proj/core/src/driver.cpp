#include "cavpend/driver.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <thread>

#include <nlohmann/json.hpp>

#include "cavpend/compressible.hpp"
#include "cavpend/errors.hpp"
#include "cavpend/incompressible.hpp"
#include "cavpend/steady.hpp"

namespace cavpend {

namespace {

std::string short_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Relative velocity statistics: max face |v| and max(|omega|, ||v||_L2).
std::pair<double, double> relative_speed(const CRField& u, double omega, const Mesh& mesh) {
  double max_speed = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    max_speed = std::max(max_speed, (u[f] - omega * rot90(mesh.faces()[f].midpoint)).norm());
  }
  double l2 = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      const int f = mesh.element_face(k, i);
      s += (u[f] - omega * rot90(mesh.faces()[f].midpoint)).squaredNorm();
    }
    l2 += mesh.area(k) / 3.0 * s;
  }
  return {max_speed, std::max(std::abs(omega), std::sqrt(l2))};
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path) {
    if (path.empty()) return;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    file_ = std::fopen(path.c_str(), "w");
    if (!file_) throw ConfigError("cannot open output file '" + path.string() + "'");
    std::fprintf(file_, "%s\n", kCsvHeader);
  }
  ~CsvWriter() {
    if (file_) std::fclose(file_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write(const StepRecord& r) {
    if (!file_) return;
    std::fprintf(file_, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.t, r.theta, r.omega,
                 r.g.x(), r.g.y(), r.mass, r.energy, r.min_density, r.max_speed);
    last_written_ = r.step;
  }
  long last_written() const { return last_written_; }
  void flush() {
    if (file_) std::fflush(file_);
  }

 private:
  std::FILE* file_ = nullptr;
  long last_written_ = -1;
};

// Uniform interface over the two solvers.
class Simulation {
 public:
  virtual ~Simulation() = default;
  virtual void advance(double dt) = 0;
  virtual StepRecord record() const = 0;
  virtual P0Field density() const = 0;
  virtual const CRField& velocity() const = 0;
};

class CompressibleSimulation final : public Simulation {
 public:
  CompressibleSimulation(const RunConfig& c, std::shared_ptr<const Mesh> mesh)
      : solver_(mesh, c.geometry, c.gas), mesh_(std::move(mesh)) {
    state_ = initial_state(*mesh_, c.rho0, c.theta0, c.omega0);
    if (c.profile == InitialProfile::hydrostatic) {
      const Cavity cavity = Cavity::from_mesh(mesh_, c.rho0 * mesh_->total_area());
      const Vec2 g = state_.body.gravity;
      const Vec3 g3(g.x(), g.y(), 0.0);
      state_.fluid.rho = project_profile(g3, solve_c(g3, cavity, c.gas), c.gas, *mesh_);
    }
  }
  void advance(double dt) override { state_ = solver_.step(state_, dt); }
  StepRecord record() const override {
    StepRecord r;
    r.step = state_.step;
    r.theta = state_.body.theta;
    r.omega = state_.body.omega;
    r.g = state_.body.gravity;
    r.mass = total_mass(state_.fluid.rho, *mesh_);
    r.energy = discrete_energy(state_, solver_.geometry(), solver_.gas(), *mesh_);
    r.min_density = *std::min_element(state_.fluid.rho.values.begin(), state_.fluid.rho.values.end());
    std::tie(r.max_speed, r.rest_measure) = relative_speed(state_.fluid.u, r.omega, *mesh_);
    return r;
  }
  P0Field density() const override { return state_.fluid.rho; }
  const CRField& velocity() const override { return state_.fluid.u; }

 private:
  CompressibleSolver solver_;
  std::shared_ptr<const Mesh> mesh_;
  CoupledState state_;
};

class IncompressibleSimulation final : public Simulation {
 public:
  IncompressibleSimulation(const RunConfig& c, std::shared_ptr<const Mesh> mesh)
      : solver_(mesh, c.geometry, c.gas.mu, c.gas.lambda), geometry_(c.geometry), mesh_(std::move(mesh)) {
    fluid_ = IncompressibleState{rigid_rotation(*mesh_, c.omega0), P0Field(*mesh_), c.rho_c};
    body_.omega = c.omega0;
    body_.gravity = gravity_from_theta(c.theta0);
    body_.theta = c.theta0;
  }
  void advance(double dt) override {
    IncompressibleStepResult r = solver_.step(fluid_, body_, dt);
    fluid_ = std::move(r.fluid);
    body_ = r.body;
    ++step_;
  }
  StepRecord record() const override {
    StepRecord r;
    r.step = step_;
    r.theta = body_.theta;
    r.omega = body_.omega;
    r.g = body_.gravity;
    r.mass = fluid_.rho_c * mesh_->total_area();
    r.energy = incompressible_energy(fluid_, body_, geometry_, *mesh_);
    r.min_density = fluid_.rho_c;
    std::tie(r.max_speed, r.rest_measure) = relative_speed(fluid_.u, r.omega, *mesh_);
    if (step_ > 0) {
      const std::vector<double> div = elem_divergence_integral(fluid_.u, *mesh_);
      r.max_divergence = 0.0;
      r.pressure_integral = 0.0;
      for (int k = 0; k < mesh_->num_elements(); ++k) {
        r.max_divergence = std::max(r.max_divergence, std::abs(div[k]) / mesh_->area(k));
        r.pressure_integral += fluid_.p[k] * mesh_->area(k);
      }
    }
    return r;
  }
  P0Field density() const override { return P0Field(*mesh_, fluid_.rho_c); }
  const CRField& velocity() const override { return fluid_.u; }

 private:
  IncompressibleSolver solver_;
  BodyGeometry geometry_;
  std::shared_ptr<const Mesh> mesh_;
  IncompressibleState fluid_;
  BodyState body_;
  long step_ = 0;
};

nlohmann::json mesh_json(const MeshStats& m) {
  return {{"vertices", m.vertices}, {"elements", m.elements},   {"faces", m.faces},
          {"boundary_faces", m.boundary_faces}, {"h_max", m.h_max}, {"area", m.area}};
}

void write_sidecar(const RunConfig& config, const RunResult& result, const std::string& status,
                   const std::string& error) {
  nlohmann::json doc;
  doc["config"] = config_table(config);
  doc["csv_header"] = kCsvHeader;
  doc["mesh"] = mesh_json(result.mesh);
  doc["wall_seconds"] = result.wall_seconds;
  doc["status"] = status;
  if (!error.empty()) doc["error"] = error;
  doc["summary"] = {{"steps", result.steps},
                    {"t_final", result.t_final},
                    {"damping_metric", result.damping_metric},
                    {"metric_window", {0.8 * config.t_end, config.t_end}},
                    {"max_mass_drift", result.max_mass_drift},
                    {"max_gravity_drift", result.max_gravity_drift},
                    {"min_density", result.min_density},
                    {"max_courant", result.max_courant},
                    {"rest_reached", result.rest_reached}};
  std::ofstream out(sidecar_path(config.csv));
  if (!out) throw ConfigError("cannot write sidecar for '" + config.csv.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace

MeshStats mesh_stats(const Mesh& mesh) {
  return {mesh.num_vertices(), mesh.num_elements(), mesh.num_faces(), mesh.num_boundary_faces(),
          mesh.h_max(),        mesh.total_area()};
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p += ".json";
  return p;
}

std::shared_ptr<const Mesh> build_mesh(const RunConfig& config) {
  if (!config.mesh_file.empty()) return std::make_shared<const Mesh>(load_mesh(config.mesh_file));
  return std::make_shared<const Mesh>(
      generate_disk_mesh(config.geometry.cavity_center(), config.geometry.inner_radius, config.target_h));
}

RunResult run(const RunConfig& config, const StepObserver& observer) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.mesh_ptr = build_mesh(config);
  result.mesh = mesh_stats(*result.mesh_ptr);

  std::unique_ptr<Simulation> sim;
  if (config.solver == SolverKind::compressible) {
    sim = std::make_unique<CompressibleSimulation>(config, result.mesh_ptr);
  } else {
    sim = std::make_unique<IncompressibleSimulation>(config, result.mesh_ptr);
  }

  CsvWriter csv(config.csv);
  const long n = config.num_steps();
  const double window_start = 0.8 * config.t_end * (1.0 - 1e-12);

  StepRecord rec = sim->record();
  const double mass0 = rec.mass;
  const double gnorm0 = rec.g.norm();
  result.min_density = rec.min_density;

  auto absorb = [&](StepRecord& r) {
    r.t = static_cast<double>(r.step) * config.dt;
    result.max_mass_drift = std::max(result.max_mass_drift, std::abs(r.mass - mass0) / mass0);
    result.max_gravity_drift = std::max(result.max_gravity_drift, std::abs(r.g.norm() - gnorm0));
    result.min_density = std::min(result.min_density, r.min_density);
    if (!std::isnan(r.max_divergence)) {
      result.max_divergence = std::max(result.max_divergence, r.max_divergence);
      result.max_pressure_integral = std::max(result.max_pressure_integral, std::abs(r.pressure_integral));
    }
    const double courant = r.max_speed * config.dt / result.mesh.h_max;
    if (courant > kCourantWarning && !(result.max_courant > kCourantWarning)) {
      std::fprintf(stderr, "warning: Courant number %.3g exceeds %.1f at step %ld (t = %g)\n", courant,
                   kCourantWarning, r.step, r.t);
    }
    result.max_courant = std::max(result.max_courant, courant);
    if (r.t >= window_start) result.damping_metric = std::max(result.damping_metric, std::abs(r.theta));
    if (r.step % config.stride == 0) csv.write(r);
    if (observer) observer(r);
  };
  absorb(rec);

  auto finish = [&]() {
    result.steps = rec.step;
    result.t_final = rec.t;
    result.final_record = rec;
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  // A release from rest only counts as coming to rest after the state has moved.
  bool armed = rec.rest_measure >= config.rest_tolerance;
  long below_since = -1;
  try {
    for (long step = 1; step <= n; ++step) {
      sim->advance(config.dt);
      rec = sim->record();
      absorb(rec);
      if (config.rest_tolerance <= 0.0) continue;
      if (rec.rest_measure >= config.rest_tolerance) {
        armed = true;
        below_since = -1;
      } else if (armed) {
        if (below_since < 0) below_since = rec.step;
        if (static_cast<double>(rec.step - below_since) * config.dt >= config.rest_hold * (1.0 - 1e-12)) {
          result.rest_reached = true;
          break;
        }
      }
    }
  } catch (const SolverError& e) {
    finish();
    csv.flush();
    if (!config.csv.empty()) write_sidecar(config, result, "solver_failure", e.what());
    throw;
  }
  if (csv.last_written() != rec.step) csv.write(rec);
  csv.flush();
  result.final_rho = sim->density();
  result.final_u = sim->velocity();
  finish();
  if (!config.csv.empty()) write_sidecar(config, result, "ok", "");
  return result;
}

// ---- experiments -----------------------------------------------------------

Sweep parse_sweep(const std::string& name) {
  if (name == "density-ratio") return Sweep::density_ratio;
  if (name == "gas-parameter") return Sweep::gas_parameter;
  if (name == "length") return Sweep::length;
  throw ConfigError("unknown sweep '" + name + "' (expected density-ratio, gas-parameter or length)");
}

std::string sweep_name(Sweep sweep) {
  switch (sweep) {
    case Sweep::density_ratio:
      return "density-ratio";
    case Sweep::gas_parameter:
      return "gas-parameter";
    case Sweep::length:
      return "length";
  }
  return {};
}

std::vector<double> default_sweep_values(Sweep sweep) {
  switch (sweep) {
    case Sweep::density_ratio:
      return {0.5, 1.0, 2.0};
    case Sweep::gas_parameter:
      return {1.0, 10.0, 100.0};
    case Sweep::length:
      return {0.3, 0.4, 0.5};
  }
  return {};
}

RunConfig experiment_base() {
  RunConfig c;
  c.t_end = 15.0;
  c.stride = 10;
  return c;
}

std::vector<ExperimentCell> experiment1_cells(Sweep sweep, const std::vector<double>& values, const RunConfig& base,
                                              const std::filesystem::path& out_dir) {
  if (values.empty()) throw InvalidParameter("sweep values must be nonempty");
  std::vector<ExperimentCell> cells;
  const std::string name = sweep_name(sweep);
  for (double v : values) {
    ExperimentCell cell;
    cell.value = v;
    cell.label = name + "=" + short_number(v);
    RunConfig& c = cell.config;
    c = base;
    c.solver = SolverKind::compressible;
    c.gas.a = 10.0;
    c.geometry.length = 0.4;
    c.geometry.density = c.rho0;
    switch (sweep) {
      case Sweep::density_ratio:
        if (!(v > 0.0)) throw InvalidParameter("density ratio must be positive");
        c.geometry.density = v * c.rho0;
        break;
      case Sweep::gas_parameter:
        if (!(v > 0.0)) throw InvalidParameter("gas parameter a must be positive");
        c.gas.a = v;
        break;
      case Sweep::length:
        c.geometry.length = v;
        break;
    }
    c.csv = out_dir.empty() ? std::filesystem::path() : out_dir / ("experiment1_" + name + "_" + short_number(v) + ".csv");
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<ExperimentCell> experiment2_cells(const RunConfig& base, const std::filesystem::path& out_dir) {
  std::vector<ExperimentCell> cells;
  auto out = [&](const std::string& stem) {
    return out_dir.empty() ? std::filesystem::path() : out_dir / ("experiment2_" + stem + ".csv");
  };
  ExperimentCell inc;
  inc.label = "incompressible";
  inc.value = std::numeric_limits<double>::quiet_NaN();
  inc.config = base;
  inc.config.solver = SolverKind::incompressible;
  inc.config.profile = InitialProfile::uniform;
  inc.config.rho_c = base.rho0;
  inc.config.csv = out("incompressible");
  cells.push_back(std::move(inc));
  for (double a : {0.1, 20.0, 100.0}) {
    ExperimentCell cell;
    cell.value = a;
    cell.label = "compressible a=" + short_number(a);
    cell.config = base;
    cell.config.solver = SolverKind::compressible;
    cell.config.gas.a = a;
    cell.config.csv = out("compressible_a" + short_number(a));
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<ExperimentRow> run_experiment(const std::vector<ExperimentCell>& cells, const ExperimentOptions& options) {
  struct Task {
    RunConfig config;
  };
  std::vector<Task> tasks;
  for (const auto& cell : cells) {
    cell.config.validate();
    tasks.push_back({cell.config});
  }
  if (options.richardson) {
    for (const auto& cell : cells) {
      RunConfig half = cell.config;
      half.dt = 0.5 * cell.config.dt;
      half.stride = 2 * cell.config.stride;
      if (!half.csv.empty()) {
        half.csv.replace_filename(half.csv.stem().string() + "_half_dt" + half.csv.extension().string());
      }
      tasks.push_back({half});
    }
  }

  std::vector<std::optional<RunResult>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        RunResult r = run(tasks[i].config);
        r.final_rho = {};
        r.final_u = {};
        r.mesh_ptr.reset();
        results[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, tasks.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ExperimentRow> rows;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const RunConfig& c = cells[i].config;
    const RunResult& r = *results[i];
    ExperimentRow row;
    row.label = cells[i].label;
    row.value = cells[i].value;
    const bool compressible = c.solver == SolverKind::compressible;
    row.solver = compressible ? "compressible" : "incompressible";
    row.a = compressible ? c.gas.a : std::numeric_limits<double>::quiet_NaN();
    row.length = c.geometry.length;
    row.density_ratio = c.geometry.density / (compressible ? c.rho0 : c.rho_c);
    row.damping_metric = r.damping_metric;
    row.metric_richardson = options.richardson
                                ? 2.0 * results[cells.size() + i]->damping_metric - r.damping_metric
                                : std::numeric_limits<double>::quiet_NaN();
    row.min_density = r.min_density;
    row.max_mass_drift = r.max_mass_drift;
    row.max_gravity_drift = r.max_gravity_drift;
    row.max_divergence = r.max_divergence;
    row.max_pressure_integral = r.max_pressure_integral;
    row.wall_seconds = r.wall_seconds;
    row.csv = c.csv.string();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_summary(const std::filesystem::path& path, const std::vector<ExperimentRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("cannot open summary file '" + path.string() + "'");
  auto num = [](double v) { return std::isnan(v) ? std::string() : short_number(v); };
  std::fprintf(f,
               "label,solver,value,a,length,density_ratio,damping_metric,metric_richardson,min_density,"
               "max_mass_drift,max_gravity_drift,csv\n");
  for (const auto& r : rows) {
    std::fprintf(f, "%s,%s,%s,%s,%s,%s,%.17g,%s,%.17g,%.17g,%.17g,%s\n", r.label.c_str(), r.solver.c_str(),
                 num(r.value).c_str(), num(r.a).c_str(), short_number(r.length).c_str(),
                 short_number(r.density_ratio).c_str(), r.damping_metric, num(r.metric_richardson).c_str(),
                 r.min_density, r.max_mass_drift, r.max_gravity_drift, r.csv.c_str());
  }
  std::fclose(f);
}

}  // namespace cavpend
