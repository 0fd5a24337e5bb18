/*
 * Copyright 2026 The Minibot Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MINIBOT_CONFIG_HPP_
#define MINIBOT_CONFIG_HPP_

// Every tunable of the stack behind one flat "section.name" key space, used
// by the config file, the CLI and the bridge's set_param command.
//
// File format: one `key = value` per line, `#` starts a comment, blank lines
// ignored. Unknown keys and unparsable values are errors naming the line.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "minibot/costmap.hpp"
#include "minibot/local_planner.hpp"
#include "minibot/localization.hpp"
#include "minibot/mapping.hpp"
#include "minibot/simulator.hpp"

namespace minibot {

struct MappingOptions {
  InverseSensorModel sensor{};
  bool scan_match = true;  // refine the odometry pose before integrating
  ScanMatchOptions matcher{};
  double publish_period = 1.0;  // s of sim time between map versions
};

struct StackOptions {
  SimulatorOptions sim{};
  AmclConfig amcl{};
  PlannerConfig planner{};
  InflationParams inflation{};
  MappingOptions mapping{};
  PoseStd initial_std{0.1, 0.1, 0.1};  // AMCL spread at start-up

  void validate() const {
    sim.robot.validate();
    sim.odom_noise.validate();
    if (!(sim.rate_hz > 0.0)) throw std::invalid_argument("sim.rate_hz must be > 0");
    amcl.validate();
    planner.validate();
    if (!(inflation.robot_radius >= 0.0) ||
        !(inflation.inflation_radius >= inflation.robot_radius) || !(inflation.decay >= 0.0)) {
      throw std::invalid_argument("costmap: need 0 <= robot_radius <= inflation_radius");
    }
    if (!(mapping.publish_period > 0.0)) {
      throw std::invalid_argument("mapping.publish_period must be > 0");
    }
  }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptionSpec {
  std::string key;
  bool runtime;  // may change while the stack is running
  std::function<void(StackOptions&, double)> set;
  std::function<double(const StackOptions&)> get;
};

namespace detail {

// `field` maps options to a reference to the stored member.
template <class Field>
OptionSpec make_option(std::string key, bool runtime, Field field) {
  using T = std::remove_reference_t<decltype(field(std::declval<StackOptions&>()))>;
  return {std::move(key), runtime,
          [field](StackOptions& o, double v) { field(o) = static_cast<T>(v); },
          [field](const StackOptions& o) {
            StackOptions copy = o;
            return static_cast<double>(field(copy));
          }};
}

inline bool is_integer_key(const std::string& key) {
  return key == "lidar.beam_count" || key == "amcl.min_particles" || key == "amcl.beam_stride" ||
         key == "planner.vx_samples" || key == "planner.vtheta_samples" ||
         key == "mapping.scan_match" || key == "mapping.match_passes";
}

}  // namespace detail

inline const std::vector<OptionSpec>& option_specs() {
  using detail::make_option;
  static const std::vector<OptionSpec> specs = {
      make_option("robot.wheel_radius", false, [](StackOptions& o) -> double& { return o.sim.robot.wheel_radius; }),
      make_option("robot.wheel_separation", false, [](StackOptions& o) -> double& { return o.sim.robot.wheel_separation; }),
      make_option("robot.max_wheel_speed", false, [](StackOptions& o) -> double& { return o.sim.robot.max_wheel_speed; }),
      make_option("robot.footprint_radius", false, [](StackOptions& o) -> double& { return o.sim.robot.footprint_radius; }),
      make_option("lidar.beam_count", false, [](StackOptions& o) -> int& { return o.sim.robot.lidar.beam_count; }),
      make_option("lidar.range_min", false, [](StackOptions& o) -> double& { return o.sim.robot.lidar.range_min; }),
      make_option("lidar.range_max", false, [](StackOptions& o) -> double& { return o.sim.robot.lidar.range_max; }),
      make_option("lidar.noise_sigma", false, [](StackOptions& o) -> double& { return o.sim.robot.lidar.noise_sigma; }),
      make_option("odom.var_x", false, [](StackOptions& o) -> double& { return o.sim.odom_noise.var_x; }),
      make_option("odom.var_y", false, [](StackOptions& o) -> double& { return o.sim.odom_noise.var_y; }),
      make_option("odom.var_yaw", false, [](StackOptions& o) -> double& { return o.sim.odom_noise.var_yaw; }),
      make_option("sim.rate_hz", false, [](StackOptions& o) -> double& { return o.sim.rate_hz; }),
      make_option("amcl.min_particles", false, [](StackOptions& o) -> int& { return o.amcl.min_particles; }),
      make_option("amcl.update_min_d", false, [](StackOptions& o) -> double& { return o.amcl.update_min_d; }),
      make_option("amcl.update_min_a", false, [](StackOptions& o) -> double& { return o.amcl.update_min_a; }),
      make_option("amcl.alpha1", false, [](StackOptions& o) -> double& { return o.amcl.alphas[0]; }),
      make_option("amcl.alpha2", false, [](StackOptions& o) -> double& { return o.amcl.alphas[1]; }),
      make_option("amcl.alpha3", false, [](StackOptions& o) -> double& { return o.amcl.alphas[2]; }),
      make_option("amcl.alpha4", false, [](StackOptions& o) -> double& { return o.amcl.alphas[3]; }),
      make_option("amcl.z_hit", false, [](StackOptions& o) -> double& { return o.amcl.likelihood.z_hit; }),
      make_option("amcl.z_rand", false, [](StackOptions& o) -> double& { return o.amcl.likelihood.z_rand; }),
      make_option("amcl.sigma_hit", false, [](StackOptions& o) -> double& { return o.amcl.likelihood.sigma_hit; }),
      make_option("amcl.max_obstacle_dist", false, [](StackOptions& o) -> double& { return o.amcl.likelihood.max_obstacle_dist; }),
      make_option("amcl.beam_stride", false, [](StackOptions& o) -> int& { return o.amcl.beam_stride; }),
      make_option("amcl.resample_neff_ratio", false, [](StackOptions& o) -> double& { return o.amcl.resample_neff_ratio; }),
      make_option("amcl.initial_std_xy", false, [](StackOptions& o) -> double& { return o.initial_std.x; }),
      make_option("amcl.initial_std_yaw", false, [](StackOptions& o) -> double& { return o.initial_std.theta; }),
      make_option("planner.min_vel_x", true, [](StackOptions& o) -> double& { return o.planner.min_vel_x; }),
      make_option("planner.max_vel_x", true, [](StackOptions& o) -> double& { return o.planner.max_vel_x; }),
      make_option("planner.max_rot_vel", true, [](StackOptions& o) -> double& { return o.planner.max_rot_vel; }),
      make_option("planner.min_in_place_rot_vel", true, [](StackOptions& o) -> double& { return o.planner.min_in_place_rot_vel; }),
      make_option("planner.acc_lim_x", true, [](StackOptions& o) -> double& { return o.planner.acc_lim_x; }),
      make_option("planner.acc_lim_theta", true, [](StackOptions& o) -> double& { return o.planner.acc_lim_theta; }),
      make_option("planner.sim_time", true, [](StackOptions& o) -> double& { return o.planner.sim_time; }),
      make_option("planner.sim_granularity", true, [](StackOptions& o) -> double& { return o.planner.sim_granularity; }),
      make_option("planner.angular_granularity", true, [](StackOptions& o) -> double& { return o.planner.angular_granularity; }),
      make_option("planner.vx_samples", true, [](StackOptions& o) -> int& { return o.planner.vx_samples; }),
      make_option("planner.vtheta_samples", true, [](StackOptions& o) -> int& { return o.planner.vtheta_samples; }),
      make_option("planner.xy_goal_tolerance", true, [](StackOptions& o) -> double& { return o.planner.xy_goal_tolerance; }),
      make_option("planner.yaw_goal_tolerance", true, [](StackOptions& o) -> double& { return o.planner.yaw_goal_tolerance; }),
      make_option("planner.local_goal_lookahead", true, [](StackOptions& o) -> double& { return o.planner.local_goal_lookahead; }),
      make_option("planner.path_distance_bias", true, [](StackOptions& o) -> double& { return o.planner.cost_weights.path_distance; }),
      make_option("planner.goal_distance_bias", true, [](StackOptions& o) -> double& { return o.planner.cost_weights.goal_distance; }),
      make_option("planner.occdist_scale", true, [](StackOptions& o) -> double& { return o.planner.cost_weights.obstacle; }),
      make_option("costmap.robot_radius", false, [](StackOptions& o) -> double& { return o.inflation.robot_radius; }),
      make_option("costmap.inflation_radius", false, [](StackOptions& o) -> double& { return o.inflation.inflation_radius; }),
      make_option("costmap.decay", false, [](StackOptions& o) -> double& { return o.inflation.decay; }),
      make_option("mapping.hit", false, [](StackOptions& o) -> double& { return o.mapping.sensor.hit; }),
      make_option("mapping.miss", false, [](StackOptions& o) -> double& { return o.mapping.sensor.miss; }),
      make_option("mapping.scan_match", false, [](StackOptions& o) -> bool& { return o.mapping.scan_match; }),
      make_option("mapping.match_passes", false, [](StackOptions& o) -> int& { return o.mapping.matcher.passes; }),
      make_option("mapping.publish_period", false, [](StackOptions& o) -> double& { return o.mapping.publish_period; }),
  };
  return specs;
}

inline const OptionSpec* find_option(std::string_view key) {
  for (const auto& s : option_specs()) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

// Parses a number for `key`; booleans also accept true/false.
inline double parse_option_value(const std::string& key, std::string_view text) {
  if (key == "mapping.scan_match") {
    if (text == "true") return 1.0;
    if (text == "false") return 0.0;
  }
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError("bad value '" + std::string(text) + "' for " + key);
  }
  if (detail::is_integer_key(key) && v != std::floor(v)) {
    throw ConfigError(key + " must be an integer, got '" + std::string(text) + "'");
  }
  if (key == "mapping.scan_match" && v != 0.0 && v != 1.0) {
    throw ConfigError("mapping.scan_match must be 0/1 or true/false");
  }
  return v;
}

// Sets one option and validates the result; on error `o` is unchanged.
inline void set_option(StackOptions& o, const std::string& key, std::string_view text) {
  const OptionSpec* spec = find_option(key);
  if (spec == nullptr) throw ConfigError("unknown key '" + key + "'");
  StackOptions next = o;
  spec->set(next, parse_option_value(key, text));
  try {
    next.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
  o = next;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline void apply_config_text(StackOptions& o, const std::string& text,
                              const std::string& source = "<config>") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    try {
      set_option(o, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

inline StackOptions load_config(const std::string& path, StackOptions base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(base, ss.str(), path);
  return base;
}

// All options in file format, one per line.
inline std::string dump_config(const StackOptions& o) {
  std::string out;
  char buf[64];
  for (const auto& s : option_specs()) {
    const double v = s.get(o);
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out += s.key + " = " + std::string(buf, ptr) + "\n";
  }
  return out;
}

}  // namespace minibot

#endif  // MINIBOT_CONFIG_HPP_
