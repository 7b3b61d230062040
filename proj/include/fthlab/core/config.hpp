// Copyright 2026 The fthlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fthlab/core/errors.hpp"
#include "fthlab/core/restriction.hpp"

namespace fthlab {

/// Every numerical tolerance and verdict threshold in one place.
struct Tolerances {
  double gradient_ode = 1e-8;  // scalar, LQR, counterexample
  double gradient_pde = 1e-6;  // Schloegl
  double riccati_periodicity = 1e-10;
  double relative_cost_change = 1e-12;
  int max_iterations = 5000;
  double scalar_final_rel = 0.01;
  double lqr_final_rel = 0.005;
  double monotone_slack = 1e-10;
  double ith_bound_rel = 1e-8;
  double dpp_scalar = 1e-6;
  double dpp_lqr = 1e-5;
  double free_equilibrium_dist = 0.05;  // |y(T) - 2|_H after the free run
  double decay_factor = 10.0;           // |P y(0)| / |P y(T)| at the reference
};

enum class Family { kScalar, kPeriodicLqr, kSchlogl };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::kScalar: return "scalar";
    case Family::kPeriodicLqr: return "periodic-lqr";
    case Family::kSchlogl: return "schlogl";
  }
  return "unknown";
}

struct ScalarParams {
  int n = 2;
  double y0 = 1.0;
  double steps_per_unit = 400.0;
};

struct LqrParams {
  std::vector<double> chis{0.0, 1.0};
  Eigen::Vector2d z{1.0, 0.0};
  int steps_per_period = 2000;
};

struct SchloglParams {
  int n_elements = 256;
  double dt = 1e-3;
  bool free_dynamics = false;
  double free_horizon = 6.0;
  std::vector<double> snapshot_times{0.0, 0.05, 0.1, 0.2, 0.3};
};

struct ExperimentConfig {
  std::vector<double> horizons;
  Window window;
  std::string output_dir = "fthlab-out";
  Tolerances tol;
  ScalarParams scalar;
  LqrParams lqr;
  SchloglParams schlogl;
  int jobs = 1;
  bool warm_start = false;

  /// Throws ConfigError when horizons or the window are inconsistent.
  void validate() const {
    if (horizons.empty()) throw ConfigError("no horizons configured");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
      if (!(horizons[i] > 0.0)) throw ConfigError("horizons must be positive");
      if (i > 0 && !(horizons[i] > horizons[i - 1])) {
        throw ConfigError("horizons must be strictly increasing");
      }
    }
    if (!(window.s < window.r)) throw ConfigError("window needs s < r");
    if (window.r > horizons.front() + 1e-12) {
      throw ConfigError("window end exceeds the shortest horizon");
    }
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
  }
};

inline ExperimentConfig default_config(Family family) {
  ExperimentConfig c;
  switch (family) {
    case Family::kScalar:
      c.horizons = {1, 2, 3, 4};
      c.window = {0.0, 1.0};
      break;
    case Family::kPeriodicLqr:
      c.horizons = {1, 2, 3, 4, 5, 6};
      c.window = {0.0, 1.0};
      break;
    case Family::kSchlogl:
      c.horizons = {0.3, 0.5, 0.6, 0.7, 0.8, 1.0};
      c.window = {0.0, 0.3};
      break;
  }
  return c;
}

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace config_detail

inline double parse_double(const std::string& text, const std::string& key) {
  const std::string t = config_detail::trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad number for '" + key + "': '" + text + "'");
  }
}

inline int parse_int(const std::string& text, const std::string& key) {
  const std::string t = config_detail::trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("bad integer for '" + key + "': '" + text + "'");
  }
  return v;
}

inline bool parse_bool(const std::string& text, const std::string& key) {
  const std::string t = config_detail::trim(text);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("bad boolean for '" + key + "': '" + text + "'");
}

/// Comma-separated list of numbers, e.g. "1,2,3,4".
inline std::vector<double> parse_list(const std::string& text,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, key));
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

inline Window parse_window(const std::string& text, const std::string& key) {
  const auto v = parse_list(text, key);
  if (v.size() != 2) throw ConfigError("'" + key + "' needs two values s,r");
  return {v[0], v[1]};
}

/// Parses flat "key = value" text with optional "[section]" headers into
/// "section.key" entries. '#' and ';' start comments.
inline std::map<std::string, std::string> parse_key_value_config(
    std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = config_detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(lineno) +
                          ": unterminated section header");
      }
      section = config_detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = config_detail::trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    const std::string full = section.empty() ? key : section + "." + key;
    out[full] = config_detail::trim(line.substr(eq + 1));
  }
  return out;
}

/// Applies one "section.key" setting. Unknown keys are configuration errors.
inline void apply_setting(ExperimentConfig& c, const std::string& full_key,
                          const std::string& value) {
  const auto dot = full_key.find('.');
  const std::string section = dot == std::string::npos ? "" : full_key.substr(0, dot);
  const std::string key = dot == std::string::npos ? full_key : full_key.substr(dot + 1);
  const std::string& k = full_key;

  if (section.empty() || section == "experiment") {
    if (key == "horizons") return void(c.horizons = parse_list(value, k));
    if (key == "window") return void(c.window = parse_window(value, k));
    if (key == "output") return void(c.output_dir = config_detail::trim(value));
    if (key == "jobs") return void(c.jobs = parse_int(value, k));
    if (key == "warm_start") return void(c.warm_start = parse_bool(value, k));
  } else if (section == "tolerances" || section == "optimizer") {
    if (key == "gradient_ode") return void(c.tol.gradient_ode = parse_double(value, k));
    if (key == "gradient_pde") return void(c.tol.gradient_pde = parse_double(value, k));
    if (key == "riccati_periodicity") return void(c.tol.riccati_periodicity = parse_double(value, k));
    if (key == "relative_cost_change") return void(c.tol.relative_cost_change = parse_double(value, k));
    if (key == "max_iterations") return void(c.tol.max_iterations = parse_int(value, k));
    if (key == "scalar_final_rel") return void(c.tol.scalar_final_rel = parse_double(value, k));
    if (key == "lqr_final_rel") return void(c.tol.lqr_final_rel = parse_double(value, k));
    if (key == "monotone_slack") return void(c.tol.monotone_slack = parse_double(value, k));
    if (key == "ith_bound_rel") return void(c.tol.ith_bound_rel = parse_double(value, k));
    if (key == "dpp_scalar") return void(c.tol.dpp_scalar = parse_double(value, k));
    if (key == "dpp_lqr") return void(c.tol.dpp_lqr = parse_double(value, k));
    if (key == "free_equilibrium_dist") return void(c.tol.free_equilibrium_dist = parse_double(value, k));
    if (key == "decay_factor") return void(c.tol.decay_factor = parse_double(value, k));
  } else if (section == "scalar") {
    if (key == "n") return void(c.scalar.n = parse_int(value, k));
    if (key == "y0") return void(c.scalar.y0 = parse_double(value, k));
    if (key == "steps_per_unit") return void(c.scalar.steps_per_unit = parse_double(value, k));
  } else if (section == "lqr" || section == "periodic-lqr") {
    if (key == "chi") return void(c.lqr.chis = parse_list(value, k));
    if (key == "steps_per_period") return void(c.lqr.steps_per_period = parse_int(value, k));
    if (key == "z") {
      const auto v = parse_list(value, k);
      if (v.size() != 2) throw ConfigError("'" + k + "' needs two values");
      return void(c.lqr.z = Eigen::Vector2d(v[0], v[1]));
    }
  } else if (section == "schlogl") {
    if (key == "n_elements") return void(c.schlogl.n_elements = parse_int(value, k));
    if (key == "dt") return void(c.schlogl.dt = parse_double(value, k));
    if (key == "free_dynamics") return void(c.schlogl.free_dynamics = parse_bool(value, k));
    if (key == "free_horizon") return void(c.schlogl.free_horizon = parse_double(value, k));
    if (key == "snapshot_times") return void(c.schlogl.snapshot_times = parse_list(value, k));
  }
  throw ConfigError("unknown configuration key '" + full_key + "'");
}

/// Applies parsed entries for one family. "horizons" and "window" inside a
/// family section ("scalar", "lqr", "schlogl") only apply to that family.
inline void apply_settings(ExperimentConfig& c, Family family,
                           const std::map<std::string, std::string>& entries) {
  auto section_family = [](const std::string& sec) -> int {
    if (sec == "scalar") return static_cast<int>(Family::kScalar);
    if (sec == "lqr" || sec == "periodic-lqr") return static_cast<int>(Family::kPeriodicLqr);
    if (sec == "schlogl") return static_cast<int>(Family::kSchlogl);
    return -1;
  };
  for (const auto& [full, value] : entries) {
    const auto dot = full.find('.');
    if (dot != std::string::npos) {
      const std::string key = full.substr(dot + 1);
      const int fam = section_family(full.substr(0, dot));
      if (fam >= 0 && (key == "horizons" || key == "window")) {
        if (fam == static_cast<int>(family)) apply_setting(c, key, value);
        continue;
      }
    }
    apply_setting(c, full, value);
  }
}

}  // namespace fthlab
