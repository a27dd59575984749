#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "phonsub/constants.hpp"
#include "phonsub/errors.hpp"
#include "phonsub/params.hpp"

namespace phonsub::cli {

/// Scenario options shared by the commands. Times and temperatures are
/// stored in SI after parsing; unit suffixes live only in the key names.
struct Scenario {
  std::optional<std::string> command;
  std::vector<double> times_s;
  std::optional<double> time_s;
  std::vector<double> temps_k;
  double grid_extent = 3.0;
  int grid_resolution = 201;
  int n_max = 10;
  std::optional<std::string> out_dir;
  std::optional<std::string> formats;
};

struct RunConfig {
  PhysicalParams params;
  Scenario scenario;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double parse_number(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number from '" +
                      value + "'");
  }
  if (consumed != value.size()) {
    throw ConfigError("config key '" + key + "': trailing characters in '" +
                      value + "'");
  }
  if (!std::isfinite(parsed)) {
    throw ConfigError("config key '" + key + "': value must be finite");
  }
  return parsed;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" +
                    value + "'");
}

inline int parse_int(const std::string& key, const std::string& value) {
  const double parsed = parse_number(key, value);
  const int as_int = static_cast<int>(parsed);
  if (double(as_int) != parsed) {
    throw ConfigError("config key '" + key + "': expected an integer");
  }
  return as_int;
}

inline std::vector<double> parse_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::string token = trim(item);
    if (token.empty()) {
      throw ConfigError("config key '" + key + "': empty list element");
    }
    out.push_back(parse_number(key, token));
  }
  return out;
}

}  // namespace config_detail

/// Parses the flat sectioned key = value format. Two sections are known,
/// [parameters] and [scenario]; every key carries its unit in the name
/// (..._mm, _nm, _ghz, _mw, _ng, _mk, _hz, _us). Unknown keys, duplicate
/// keys and malformed lines are rejected.
inline RunConfig parse_config_text(const std::string& text) {
  using config_detail::parse_bool;
  using config_detail::parse_int;
  using config_detail::parse_list;
  using config_detail::parse_number;
  using config_detail::trim;

  RunConfig config{};
  const double two_pi = 2.0 * constants::pi;

  std::map<std::string, bool> seen;
  std::string section;
  std::istringstream stream(text);
  std::string line;
  int line_number = 0;
  bool have_params_section = false;

  while (std::getline(stream, line)) {
    ++line_number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_number) +
                          ": malformed section header");
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section != "parameters" && section != "scenario") {
        throw ConfigError("config line " + std::to_string(line_number) +
                          ": unknown section [" + section + "]");
      }
      if (section == "parameters") have_params_section = true;
      continue;
    }
    const auto equals = stripped.find('=');
    if (equals == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, equals));
    const std::string value = trim(stripped.substr(equals + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": empty key or value");
    }
    if (section.empty()) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": key '" + key + "' appears before any section");
    }
    const std::string qualified = section + "." + key;
    if (seen.count(qualified)) {
      throw ConfigError("duplicate config key '" + qualified + "'");
    }
    seen[qualified] = true;

    if (section == "parameters") {
      if (key == "cavity_length_mm") {
        config.params.cavity_length = parse_number(key, value) * 1e-3;
      } else if (key == "laser_wavelength_nm") {
        config.params.laser_wavelength = parse_number(key, value) * 1e-9;
      } else if (key == "mech_freq_ghz") {
        config.params.mech_freq = parse_number(key, value) * 1e9 * two_pi;
      } else if (key == "laser_power_mw") {
        config.params.laser_power = parse_number(key, value) * 1e-3;
      } else if (key == "mirror_mass_ng") {
        config.params.mirror_mass = parse_number(key, value) * 1e-12;
      } else if (key == "finesse") {
        config.params.finesse = parse_number(key, value);
      } else if (key == "bath_temp_mk") {
        config.params.bath_temp = parse_number(key, value) * 1e-3;
      } else if (key == "mech_damping_hz") {
        config.params.mech_damping = parse_number(key, value) * two_pi;
      } else if (key == "detuning_ratio") {
        config.params.detuning_ratio = parse_number(key, value);
      } else if (key == "cavity_freq_equals_laser") {
        config.params.cavity_freq_equals_laser = parse_bool(key, value);
      } else if (key == "min_quality_factor") {
        config.params.min_quality_factor = parse_number(key, value);
      } else {
        throw ConfigError("unknown [parameters] key '" + key + "'");
      }
    } else {
      if (key == "command") {
        config.scenario.command = value;
      } else if (key == "times_us") {
        config.scenario.times_s = parse_list(key, value);
        for (double& t : config.scenario.times_s) t *= 1e-6;
      } else if (key == "time_us") {
        config.scenario.time_s = parse_number(key, value) * 1e-6;
      } else if (key == "temps_mk") {
        config.scenario.temps_k = parse_list(key, value);
        for (double& t : config.scenario.temps_k) t *= 1e-3;
      } else if (key == "grid_extent") {
        config.scenario.grid_extent = parse_number(key, value);
      } else if (key == "grid_resolution") {
        config.scenario.grid_resolution = parse_int(key, value);
      } else if (key == "n_max") {
        config.scenario.n_max = parse_int(key, value);
      } else if (key == "out_dir") {
        config.scenario.out_dir = value;
      } else if (key == "formats") {
        config.scenario.formats = value;
      } else {
        throw ConfigError("unknown [scenario] key '" + key + "'");
      }
    }
  }

  if (!have_params_section) {
    throw ConfigError("config is missing the [parameters] section");
  }
  const struct {
    const char* name;
    bool present;
  } required[] = {
      {"cavity_length_mm", seen.count("parameters.cavity_length_mm") > 0},
      {"laser_wavelength_nm", seen.count("parameters.laser_wavelength_nm") > 0},
      {"mech_freq_ghz", seen.count("parameters.mech_freq_ghz") > 0},
      {"laser_power_mw", seen.count("parameters.laser_power_mw") > 0},
      {"mirror_mass_ng", seen.count("parameters.mirror_mass_ng") > 0},
      {"finesse", seen.count("parameters.finesse") > 0},
      {"bath_temp_mk", seen.count("parameters.bath_temp_mk") > 0},
      {"mech_damping_hz", seen.count("parameters.mech_damping_hz") > 0},
      {"detuning_ratio", seen.count("parameters.detuning_ratio") > 0},
  };
  for (const auto& req : required) {
    if (!req.present) {
      throw ConfigError(std::string("config is missing required key '") +
                        req.name + "'");
    }
  }
  return config;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

}  // namespace phonsub::cli
