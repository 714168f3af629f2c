#include "cavpend/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "cavpend/errors.hpp"

namespace cavpend {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc() || r.ptr != last || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': expected a finite number, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  int v = 0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
  }
  return v;
}

struct KeyAccess {
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

KeyAccess number(std::string key, double RunConfig::*member) {
  return {key, [member](const RunConfig& c) { return format_double(c.*member); },
          [key, member](RunConfig& c, const std::string& v) { c.*member = parse_double(key, v); }};
}

template <class Owner>
KeyAccess nested(std::string key, Owner RunConfig::*owner, double Owner::*member) {
  return {key, [owner, member](const RunConfig& c) { return format_double(c.*owner.*member); },
          [key, owner, member](RunConfig& c, const std::string& v) { c.*owner.*member = parse_double(key, v); }};
}

const std::vector<KeyAccess>& table() {
  static const std::vector<KeyAccess> keys = {
      nested("geometry.length", &RunConfig::geometry, &BodyGeometry::length),
      nested("geometry.inner_radius", &RunConfig::geometry, &BodyGeometry::inner_radius),
      nested("geometry.outer_radius", &RunConfig::geometry, &BodyGeometry::outer_radius),
      nested("geometry.body_density", &RunConfig::geometry, &BodyGeometry::density),
      nested("gas.a", &RunConfig::gas, &GasParams::a),
      nested("gas.gamma", &RunConfig::gas, &GasParams::gamma),
      nested("gas.mu", &RunConfig::gas, &GasParams::mu),
      nested("gas.lambda", &RunConfig::gas, &GasParams::lambda),
      number("initial.rho0", &RunConfig::rho0),
      number("initial.theta0", &RunConfig::theta0),
      number("initial.omega0", &RunConfig::omega0),
      {"initial.profile",
       [](const RunConfig& c) { return std::string(c.profile == InitialProfile::uniform ? "uniform" : "hydrostatic"); },
       [](RunConfig& c, const std::string& v) {
         if (v == "uniform") {
           c.profile = InitialProfile::uniform;
         } else if (v == "hydrostatic") {
           c.profile = InitialProfile::hydrostatic;
         } else {
           throw ConfigError("config key 'initial.profile': expected uniform or hydrostatic, got '" + v + "'");
         }
       }},
      number("mesh.target_h", &RunConfig::target_h),
      {"mesh.file", [](const RunConfig& c) { return c.mesh_file.string(); },
       [](RunConfig& c, const std::string& v) { c.mesh_file = v; }},
      number("time.dt", &RunConfig::dt),
      number("time.t_end", &RunConfig::t_end),
      {"time.stride", [](const RunConfig& c) { return std::to_string(c.stride); },
       [](RunConfig& c, const std::string& v) { c.stride = parse_int("time.stride", v); }},
      number("time.rest_tolerance", &RunConfig::rest_tolerance),
      number("time.rest_hold", &RunConfig::rest_hold),
      {"solver.kind",
       [](const RunConfig& c) {
         return std::string(c.solver == SolverKind::compressible ? "compressible" : "incompressible");
       },
       [](RunConfig& c, const std::string& v) {
         if (v == "compressible") {
           c.solver = SolverKind::compressible;
         } else if (v == "incompressible") {
           c.solver = SolverKind::incompressible;
         } else {
           throw ConfigError("config key 'solver.kind': expected compressible or incompressible, got '" + v + "'");
         }
       }},
      number("solver.rho_c", &RunConfig::rho_c),
      {"output.csv", [](const RunConfig& c) { return c.csv.string(); },
       [](RunConfig& c, const std::string& v) { c.csv = v; }},
  };
  return keys;
}

const KeyAccess& find_key(const std::string& key) {
  for (const auto& k : table())
    if (k.key == key) return k;
  throw ConfigError("unknown config key '" + key + "'");
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

}  // namespace

void RunConfig::validate() const {
  require(geometry.inner_radius > 0.0, "geometry.inner_radius", "must be positive");
  require(geometry.outer_radius > geometry.inner_radius, "geometry.outer_radius", "must exceed inner_radius");
  require(geometry.density > 0.0, "geometry.body_density", "must be positive");
  require(gas.a > 0.0, "gas.a", "must be positive");
  require(gas.gamma > 1.0, "gas.gamma", "must exceed 1");
  require(gas.mu > 0.0, "gas.mu", "must be positive");
  require(gas.lambda >= 0.0, "gas.lambda", "must be non-negative");
  require(rho0 > 0.0, "initial.rho0", "must be positive");
  if (mesh_file.empty()) {
    require(target_h > 0.0, "mesh.target_h", "must be positive");
    require(target_h < geometry.inner_radius, "mesh.target_h", "must be smaller than the cavity radius");
  }
  require(dt > 0.0, "time.dt", "must be positive");
  require(t_end > 0.0, "time.t_end", "must be positive");
  require(t_end / dt < 1e9, "time.t_end", "implies more than 1e9 steps");
  require(stride >= 1, "time.stride", "must be at least 1");
  require(rest_tolerance >= 0.0, "time.rest_tolerance", "must be non-negative");
  require(rest_hold >= 0.0, "time.rest_hold", "must be non-negative");
  require(rho_c > 0.0, "solver.rho_c", "must be positive");
  if (solver == SolverKind::incompressible) {
    require(profile == InitialProfile::uniform, "initial.profile", "the incompressible solver needs 'uniform'");
  }
}

long RunConfig::num_steps() const { return std::lround(t_end / dt); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& k : table()) out.push_back(k.key);
    return out;
  }();
  return keys;
}

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_key(key).set(config, value);
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return find_key(key).get(config); }

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

RunConfig parse_config_ini(const std::string& text, RunConfig base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.message() + " at line " + std::to_string(e.line()));
  }
  RunConfig config = std::move(base);
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError("config key '" + section + "' must be inside a [section]");
    for (const auto& [key, value] : body) set_config_value(config, section + "." + key, value.data());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (path.extension() != ".json") return parse_config_ini(buffer.str(), std::move(base));

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("sidecar '" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (!doc.contains("config") || !doc["config"].is_object()) {
    throw ConfigError("sidecar '" + path.string() + "' has no \"config\" object");
  }
  RunConfig config = std::move(base);
  for (const auto& [section, keys] : doc["config"].items()) {
    if (!keys.is_object()) throw ConfigError("sidecar config section '" + section + "' is not an object");
    for (const auto& [key, value] : keys.items()) {
      if (!value.is_string()) throw ConfigError("sidecar config value '" + section + "." + key + "' is not a string");
      set_config_value(config, section + "." + key, value.get<std::string>());
    }
  }
  return config;
}

std::map<std::string, std::map<std::string, std::string>> config_table(const RunConfig& config) {
  std::map<std::string, std::map<std::string, std::string>> out;
  for (const auto& k : table()) {
    const auto dot = k.key.find('.');
    out[k.key.substr(0, dot)][k.key.substr(dot + 1)] = k.get(config);
  }
  return out;
}

std::string to_ini(const RunConfig& config) {
  std::ostringstream out;
  std::string current;
  for (const auto& k : table()) {
    const auto dot = k.key.find('.');
    const std::string section = k.key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << k.key.substr(dot + 1) << " = " << k.get(config) << '\n';
  }
  return out.str();
}

}  // namespace cavpend
