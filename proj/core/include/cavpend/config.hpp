#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cavpend/gas.hpp"
#include "cavpend/rigid.hpp"

namespace cavpend {

enum class SolverKind { compressible, incompressible };
enum class InitialProfile { uniform, hydrostatic };

/// Everything a single simulation needs. Keys in the text format are
/// `section.key`; see `config_keys()`.
struct RunConfig {
  BodyGeometry geometry;
  GasParams gas;

  double rho0 = 1.0;
  double theta0 = 0.06981317007977318;  // pi / 45
  double omega0 = 0.0;
  InitialProfile profile = InitialProfile::uniform;

  double target_h = 0.01;
  std::filesystem::path mesh_file;  // empty: generate a disk mesh

  double dt = 1e-3;
  double t_end = 10.0;
  int stride = 1;
  /// Stop early once max(|omega|, ||u - omega e3 x x||_L2) has stayed below
  /// this for rest_hold time units, counted only after it was at or above it;
  /// 0 disables.
  double rest_tolerance = 0.0;
  double rest_hold = 0.0;

  SolverKind solver = SolverKind::compressible;
  double rho_c = 1.0;

  std::filesystem::path csv;  // empty: no files written

  /// Throws ConfigError naming the first offending key.
  void validate() const;

  long num_steps() const;
  /// Body density over mean initial fluid density.
  double density_ratio() const { return geometry.density / rho0; }
};

/// All recognized keys, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form; throws ConfigError on an unknown key or a
/// malformed value.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Value of a key formatted so that parsing it back is exact.
std::string get_config_value(const RunConfig& config, const std::string& key);

/// Applies `section.key=value`.
void apply_override(RunConfig& config, const std::string& assignment);

/// Reads an INI file with [section] headers, or the "config" object of a run
/// sidecar (.json). Keys absent from the file keep their value in `base`.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_config_ini(const std::string& text, RunConfig base = {});

/// INI text containing every key.
std::string to_ini(const RunConfig& config);

/// section -> key -> value, every key present.
std::map<std::string, std::map<std::string, std::string>> config_table(const RunConfig& config);

}  // namespace cavpend
