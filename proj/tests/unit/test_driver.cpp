#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cavpend/config.hpp"
#include "cavpend/driver.hpp"
#include "cavpend/errors.hpp"

using namespace cavpend;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cavpend_driver_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunConfig tiny() {
  RunConfig c;
  c.target_h = 0.04;
  c.t_end = 0.05;
  return c;
}

}  // namespace

TEST(Config, DefaultsMatchTheExperimentSetup) {
  const RunConfig c;
  EXPECT_DOUBLE_EQ(c.geometry.length, 0.4);
  EXPECT_DOUBLE_EQ(c.geometry.inner_radius, 0.1);
  EXPECT_DOUBLE_EQ(c.geometry.outer_radius, 0.2);
  EXPECT_DOUBLE_EQ(c.gas.gamma, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(c.gas.mu, 100.0);
  EXPECT_DOUBLE_EQ(c.gas.lambda, 0.0);
  EXPECT_DOUBLE_EQ(c.theta0, std::acos(-1.0) / 45.0);
  EXPECT_DOUBLE_EQ(c.target_h, 0.01);
  EXPECT_DOUBLE_EQ(c.dt, 1e-3);
  EXPECT_DOUBLE_EQ(c.t_end, 10.0);
  EXPECT_EQ(c.num_steps(), 10000);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, IniParsesSectionsAndKeepsOtherDefaults) {
  const RunConfig c = parse_config_ini("# comment\n[gas]\na = 20\n\n[time]\ndt = 5e-4\nstride = 4\n[solver]\nkind = incompressible\n");
  EXPECT_DOUBLE_EQ(c.gas.a, 20.0);
  EXPECT_DOUBLE_EQ(c.dt, 5e-4);
  EXPECT_EQ(c.stride, 4);
  EXPECT_EQ(c.solver, SolverKind::incompressible);
  EXPECT_DOUBLE_EQ(c.gas.mu, 100.0);
}

TEST(Config, BaseValuesSurviveWhenTheFileOmitsThem) {
  RunConfig base;
  base.t_end = 15.0;
  const RunConfig c = parse_config_ini("[gas]\na = 2\n", base);
  EXPECT_DOUBLE_EQ(c.t_end, 15.0);
  EXPECT_DOUBLE_EQ(c.gas.a, 2.0);
}

TEST(Config, UnknownKeysAreErrors) {
  try {
    parse_config_ini("[gas]\naa = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("gas.aa"), std::string::npos);
  }
  EXPECT_THROW(parse_config_ini("[nosuch]\nkey = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("dt = 1\n"), ConfigError);
}

TEST(Config, MalformedValuesAreErrors) {
  EXPECT_THROW(parse_config_ini("[time]\ndt = fast\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("[time]\ndt = 1e-3x\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("[time]\nstride = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("[solver]\nkind = magic\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("[initial]\nprofile = wavy\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("[gas]\na = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse_config_ini("[gas\na = 1\n"), ConfigError);
}

TEST(Config, OverridesUseSectionDotKey) {
  RunConfig c;
  apply_override(c, "geometry.length=0.55");
  EXPECT_DOUBLE_EQ(c.geometry.length, 0.55);
  apply_override(c, "output.csv=out/x.csv");
  EXPECT_EQ(c.csv, fs::path("out/x.csv"));
  EXPECT_THROW(apply_override(c, "geometry.length"), ConfigError);
  EXPECT_THROW(apply_override(c, "=3"), ConfigError);
  EXPECT_THROW(apply_override(c, "geometry.lenght=3"), ConfigError);
}

TEST(Config, IniRoundTripIsExact) {
  RunConfig c;
  c.gas.a = 0.1;
  c.theta0 = 0.123456789012345678;
  c.dt = 1.0 / 3.0 * 1e-3;
  c.profile = InitialProfile::hydrostatic;
  c.csv = "some/where.csv";
  const RunConfig back = parse_config_ini(to_ini(c));
  for (const auto& key : config_keys()) {
    EXPECT_EQ(get_config_value(back, key), get_config_value(c, key)) << key;
  }
  EXPECT_EQ(back.theta0, c.theta0);
  EXPECT_EQ(back.dt, c.dt);
}

TEST(Config, ValidationNamesTheKey) {
  auto expect_key = [](RunConfig c, const std::string& key) {
    try {
      c.validate();
      FAIL() << "expected ConfigError for " << key;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
    }
  };
  RunConfig c;
  c.dt = 0.0;
  expect_key(c, "time.dt");
  c = RunConfig{};
  c.dt = -1e-3;
  expect_key(c, "time.dt");
  c = RunConfig{};
  c.gas.gamma = 1.0;
  expect_key(c, "gas.gamma");
  c = RunConfig{};
  c.target_h = 0.2;
  expect_key(c, "mesh.target_h");
  c = RunConfig{};
  c.geometry.outer_radius = 0.05;
  expect_key(c, "geometry.outer_radius");
  c = RunConfig{};
  c.stride = 0;
  expect_key(c, "time.stride");
  c = RunConfig{};
  c.solver = SolverKind::incompressible;
  c.profile = InitialProfile::hydrostatic;
  expect_key(c, "initial.profile");
}

TEST(Run, NonPositiveStepFailsBeforeAnyOutput) {
  const fs::path dir = scratch("dt");
  RunConfig c = tiny();
  c.dt = 0.0;
  c.csv = dir / "never.csv";
  EXPECT_THROW(run(c), ConfigError);
  EXPECT_FALSE(fs::exists(c.csv));
  EXPECT_FALSE(fs::exists(sidecar_path(c.csv)));
}

TEST(Run, SameConfigTwiceGivesBitIdenticalCsv) {
  const fs::path dir = scratch("determinism");
  RunConfig c = tiny();
  c.csv = dir / "a.csv";
  run(c);
  c.csv = dir / "b.csv";
  run(c);
  const std::string a = slurp(dir / "a.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b.csv"));
}

TEST(Run, CsvHasTheFixedHeaderAndStride) {
  const fs::path dir = scratch("csv");
  RunConfig c = tiny();
  c.t_end = 0.023;
  c.stride = 10;
  c.csv = dir / "r.csv";
  const RunResult r = run(c);
  EXPECT_EQ(r.steps, 23);
  std::ifstream in(c.csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,t,theta,omega,g1,g2,mass,energy,min_density,max_speed");
  std::vector<long> steps;
  while (std::getline(in, line)) {
    steps.push_back(std::stol(line.substr(0, line.find(','))));
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 9);
  }
  EXPECT_EQ(steps, (std::vector<long>{0, 10, 20, 23}));
}

TEST(Run, SidecarAloneReproducesTheRun) {
  const fs::path dir = scratch("sidecar");
  RunConfig c = tiny();
  c.gas.a = 3.7;
  c.theta0 = 0.05;
  c.csv = dir / "first.csv";
  run(c);
  const std::string sidecar = slurp(sidecar_path(c.csv));
  for (const char* field : {"\"config\"", "\"mesh\"", "\"wall_seconds\"", "\"elements\"", "\"status\": \"ok\""}) {
    EXPECT_NE(sidecar.find(field), std::string::npos) << field;
  }
  RunConfig again = load_config(sidecar_path(c.csv));
  EXPECT_EQ(again.csv, c.csv);
  again.csv = dir / "second.csv";
  run(again);
  EXPECT_EQ(slurp(dir / "first.csv"), slurp(dir / "second.csv"));
}

TEST(Run, ObserverSeesEveryStepAndInvariantsHold) {
  RunConfig c = tiny();
  std::vector<StepRecord> seen;
  const RunResult r = run(c, [&](const StepRecord& s) { seen.push_back(s); });
  ASSERT_EQ(seen.size(), 51u);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_EQ(seen[i].step, static_cast<long>(i));
    EXPECT_DOUBLE_EQ(seen[i].t, 1e-3 * static_cast<double>(i));
    EXPECT_GT(seen[i].min_density, 0.0);
  }
  EXPECT_EQ(seen[0].max_speed, 0.0);
  EXPECT_LE(r.max_mass_drift, 1e-12);
  EXPECT_LE(r.max_gravity_drift, 1e-13);
  EXPECT_EQ(r.final_rho.size(), r.mesh.elements);
}

TEST(Run, MetricIsTheWindowMaximum) {
  RunConfig c = tiny();
  c.t_end = 0.4;
  double expected = 0.0;
  run(c, [&](const StepRecord& s) {
    if (s.t >= 0.8 * c.t_end - 1e-12) expected = std::max(expected, std::abs(s.theta));
  });
  EXPECT_EQ(run(c).damping_metric, expected);
}

TEST(Run, RestToleranceStopsOnceMotionDiesDown) {
  RunConfig c = tiny();
  c.t_end = 3.0;
  c.theta0 = 0.0;
  c.omega0 = 2e-3;
  c.rest_tolerance = 1e-3;
  const RunResult r = run(c);
  EXPECT_TRUE(r.rest_reached);
  EXPECT_GT(r.steps, 1);
  EXPECT_LT(r.steps, c.num_steps());
  EXPECT_LT(r.final_record.rest_measure, 1e-3);
}

TEST(Run, RestMustHoldForTheRequestedTime) {
  RunConfig c = tiny();
  c.t_end = 3.0;
  c.theta0 = 0.0;
  c.omega0 = 2e-3;
  c.rest_tolerance = 1e-3;
  long first_below = -1;
  const RunResult instant = run(c, [&](const StepRecord& s) {
    if (first_below < 0 && s.step > 0 && s.rest_measure < 1e-3) first_below = s.step;
  });
  ASSERT_EQ(instant.steps, first_below);

  c.rest_hold = 0.1;
  const RunResult held = run(c);
  ASSERT_TRUE(held.rest_reached);
  EXPECT_EQ(held.steps, first_below + 100);
}

TEST(Run, ReleaseFromRestDoesNotCountAsRest) {
  RunConfig c = tiny();
  c.rest_tolerance = 1e-3;
  const RunResult r = run(c);
  EXPECT_FALSE(r.rest_reached);
  EXPECT_EQ(r.steps, c.num_steps());
}

TEST(Run, CourantNumberIsTheLargestStepValue) {
  RunConfig c = tiny();
  c.t_end = 0.2;
  double expected = 0.0;
  const RunResult r = run(c, [&](const StepRecord& s) { expected = std::max(expected, s.max_speed); });
  EXPECT_GT(r.max_courant, 0.0);
  EXPECT_DOUBLE_EQ(r.max_courant, expected * c.dt / r.mesh.h_max);
  EXPECT_LT(r.max_courant, kCourantWarning);
}

TEST(Run, IncompressibleReportsConstantMass) {
  RunConfig c = tiny();
  c.solver = SolverKind::incompressible;
  c.rho_c = 2.0;
  double area = 0.0;
  const RunResult r = run(c, [&](const StepRecord& s) {
    if (s.step == 0) area = s.mass / 2.0;
    EXPECT_EQ(s.min_density, 2.0);
  });
  EXPECT_DOUBLE_EQ(area, r.mesh.area);
  EXPECT_EQ(r.max_mass_drift, 0.0);
}

TEST(Run, HydrostaticStartCarriesTheConfiguredMass) {
  RunConfig c = tiny();
  c.profile = InitialProfile::hydrostatic;
  double m0 = 0.0;
  const RunResult r = run(c, [&](const StepRecord& s) {
    if (s.step == 0) m0 = s.mass;
  });
  EXPECT_NEAR(m0, r.mesh.area, 1e-6 * r.mesh.area);
  EXPECT_LE(r.max_mass_drift, 1e-12);
}

TEST(Experiments, SweepNamesAndDefaults) {
  EXPECT_EQ(parse_sweep("density-ratio"), Sweep::density_ratio);
  EXPECT_EQ(parse_sweep("gas-parameter"), Sweep::gas_parameter);
  EXPECT_EQ(parse_sweep("length"), Sweep::length);
  EXPECT_THROW(parse_sweep("mass"), ConfigError);
  EXPECT_EQ(default_sweep_values(Sweep::density_ratio), (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_THROW(experiment1_cells(Sweep::length, {}, RunConfig{}, {}), InvalidParameter);
}

TEST(Experiments, Experiment1FixesTheComplements) {
  RunConfig base;
  base.gas.a = 77.0;
  base.geometry.length = 0.9;
  base.geometry.density = 5.0;
  base.rho0 = 2.0;

  auto r = experiment1_cells(Sweep::density_ratio, {0.5, 2.0}, base, "out");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r[0].config.gas.a, 10.0);
  EXPECT_DOUBLE_EQ(r[0].config.geometry.length, 0.4);
  EXPECT_DOUBLE_EQ(r[0].config.density_ratio(), 0.5);
  EXPECT_DOUBLE_EQ(r[1].config.geometry.density, 4.0);
  EXPECT_EQ(r[0].config.csv, fs::path("out/experiment1_density-ratio_0.5.csv"));

  auto a = experiment1_cells(Sweep::gas_parameter, {1.0}, base, "out");
  EXPECT_DOUBLE_EQ(a[0].config.gas.a, 1.0);
  EXPECT_DOUBLE_EQ(a[0].config.geometry.length, 0.4);
  EXPECT_DOUBLE_EQ(a[0].config.density_ratio(), 1.0);

  auto l = experiment1_cells(Sweep::length, {0.3}, base, "out");
  EXPECT_DOUBLE_EQ(l[0].config.geometry.length, 0.3);
  EXPECT_DOUBLE_EQ(l[0].config.gas.a, 10.0);
  EXPECT_DOUBLE_EQ(l[0].config.density_ratio(), 1.0);
}

TEST(Experiments, Experiment2Cells) {
  const auto cells = experiment2_cells(experiment_base(), "e2");
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].config.solver, SolverKind::incompressible);
  EXPECT_DOUBLE_EQ(cells[0].config.rho_c, 1.0);
  const double as[] = {0.1, 20.0, 100.0};
  for (int i = 1; i < 4; ++i) {
    EXPECT_EQ(cells[i].config.solver, SolverKind::compressible);
    EXPECT_DOUBLE_EQ(cells[i].config.gas.a, as[i - 1]);
    EXPECT_DOUBLE_EQ(cells[i].config.geometry.length, 0.4);
    EXPECT_DOUBLE_EQ(cells[i].config.geometry.density, 1.0);
  }
  EXPECT_DOUBLE_EQ(experiment_base().t_end, 15.0);
}

TEST(Experiments, ResultsDoNotDependOnTheWorkerCount) {
  RunConfig base = tiny();
  const fs::path d1 = scratch("pool1"), d3 = scratch("pool3");
  const auto serial = run_experiment(experiment1_cells(Sweep::gas_parameter, {1, 10, 100}, base, d1), {1, false});
  const auto pooled = run_experiment(experiment1_cells(Sweep::gas_parameter, {1, 10, 100}, base, d3), {3, false});
  ASSERT_EQ(serial.size(), 3u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].label, pooled[i].label);
    EXPECT_EQ(serial[i].damping_metric, pooled[i].damping_metric);
    EXPECT_TRUE(std::isnan(serial[i].metric_richardson));
    EXPECT_EQ(slurp(serial[i].csv), slurp(pooled[i].csv));
  }
  EXPECT_EQ(serial[0].label, "gas-parameter=1");
}

TEST(Experiments, RichardsonCombinesTheHalfStepRun) {
  RunConfig base = tiny();
  const fs::path dir = scratch("richardson");
  const auto cells = experiment1_cells(Sweep::length, {0.4}, base, dir);
  const auto rows = run_experiment(cells, {2, true});
  RunConfig half = cells[0].config;
  half.dt *= 0.5;
  half.csv.clear();
  const double m_half = run(half).damping_metric;
  EXPECT_EQ(rows[0].metric_richardson, 2.0 * m_half - rows[0].damping_metric);
  EXPECT_TRUE(fs::exists(dir / "experiment1_length_0.4_half_dt.csv"));
}

TEST(Experiments, SummaryCsv) {
  const fs::path dir = scratch("summary");
  ExperimentRow row;
  row.label = "x";
  row.solver = "incompressible";
  row.value = std::nan("");
  row.a = std::nan("");
  row.length = 0.4;
  row.density_ratio = 1.0;
  row.damping_metric = 0.25;
  row.metric_richardson = std::nan("");
  row.csv = "x.csv";
  write_summary(dir / "s.csv", {row});
  std::istringstream in(slurp(dir / "s.csv"));
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header,
            "label,solver,value,a,length,density_ratio,damping_metric,metric_richardson,min_density,"
            "max_mass_drift,max_gravity_drift,csv");
  EXPECT_EQ(line, "x,incompressible,,,0.4,1,0.25,,0,0,0,x.csv");
}
