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

#ifndef MINIBOT_SIMULATOR_HPP_
#define MINIBOT_SIMULATOR_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "minibot/distance_field.hpp"
#include "minibot/grid_traversal.hpp"
#include "minibot/world.hpp"

namespace minibot {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Differential-drive kinematics

// v = r (w_R + w_L) / 2,  w = r (w_R - w_L) / d.
inline Twist2D wheels_to_twist(const WheelSpeeds& ws, const RobotParams& params) {
  const double r = params.wheel_radius;
  return {r * (ws.right + ws.left) / 2.0, r * (ws.right - ws.left) / params.wheel_separation};
}

// Inverse of wheels_to_twist. When either wheel would exceed max_wheel_speed
// both are scaled by the same factor, so the turning radius is kept.
inline WheelSpeeds twist_to_wheels(const Twist2D& t, const RobotParams& params) {
  const double r = params.wheel_radius;
  const double half_turn = t.w * params.wheel_separation / 2.0;
  WheelSpeeds ws{(t.v + half_turn) / r, (t.v - half_turn) / r};
  const double peak = std::max(std::abs(ws.right), std::abs(ws.left));
  if (peak > params.max_wheel_speed) {
    const double k = params.max_wheel_speed / peak;
    ws.right *= k;
    ws.left *= k;
  }
  return ws;
}

// The twist the drive can actually realise for a request.
inline Twist2D limit_twist(const Twist2D& t, const RobotParams& params) {
  const double half_turn = t.w * params.wheel_separation / 2.0;
  const double peak = std::max(std::abs(t.v + half_turn), std::abs(t.v - half_turn)) /
                      params.wheel_radius;
  if (peak <= params.max_wheel_speed) return t;
  return wheels_to_twist(twist_to_wheels(t, params), params);
}

inline constexpr double kStraightLineEpsilon = 1e-9;  // rad/s

// Closed-form constant-twist motion. The displacement is the chord of the
// arc, laid along the mean heading, which keeps the motion free of lateral
// slip and stays well conditioned as w approaches zero.
inline Pose2D step_kinematics(const Pose2D& pose, const Twist2D& t, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_kinematics: dt must be > 0");
  if (std::abs(t.w) < kStraightLineEpsilon) {
    return {pose.x + t.v * dt * std::cos(pose.theta), pose.y + t.v * dt * std::sin(pose.theta),
            pose.theta};
  }
  const double dtheta = t.w * dt;
  const double chord = t.v * 2.0 * std::sin(dtheta / 2.0) / t.w;
  const double mid = pose.theta + dtheta / 2.0;
  return {pose.x + chord * std::cos(mid), pose.y + chord * std::sin(mid), pose.theta + dtheta};
}

// ---------------------------------------------------------------------------
// Odometry

// Variances of the body-frame odometry increment per metre of mean wheel
// travel.
struct OdomNoise {
  double var_x = 0.0001;
  double var_y = 0.0001;
  double var_yaw = 0.01;

  void validate() const {
    if (!(var_x >= 0.0) || !(var_y >= 0.0) || !(var_yaw >= 0.0)) {
      throw std::invalid_argument("OdomNoise: variances must be >= 0");
    }
  }
};

struct SimState {
  Pose2D true_pose{};
  Pose2D odom_pose{};
  Twist2D commanded{};
  double time = 0.0;
  std::uint64_t rng_seed = 0;
  Rng rng{0};
  bool collided = false;

  SimState() = default;
  SimState(Pose2D start, std::uint64_t seed)
      : true_pose(start), odom_pose(start), rng_seed(seed), rng(seed) {}
};

// Mean absolute distance rolled by the two wheels for a body increment.
inline double wheel_travel(const Pose2D& body_delta, double wheel_separation) {
  const double s = std::hypot(body_delta.x, body_delta.y);
  const double arc = body_delta.theta * wheel_separation / 2.0;
  return (std::abs(s + arc) + std::abs(s - arc)) / 2.0;
}

// Adds a true body-frame increment to the odometry estimate, corrupted by
// zero-mean Gaussian noise whose variance scales with wheel travel.
inline void apply_odometry(SimState& state, const Pose2D& body_delta, const OdomNoise& noise,
                           double wheel_separation) {
  const double travel = wheel_travel(body_delta, wheel_separation);
  Pose2D noisy = body_delta;
  if (travel > 0.0) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const double ex = n01(state.rng) * std::sqrt(noise.var_x * travel);
    const double ey = n01(state.rng) * std::sqrt(noise.var_y * travel);
    const double eyaw = n01(state.rng) * std::sqrt(noise.var_yaw * travel);
    noisy = Pose2D{body_delta.x + ex, body_delta.y + ey, body_delta.theta + eyaw};
  }
  state.odom_pose = compose(state.odom_pose, noisy);
}

// Advances ground truth exactly under the commanded twist and the odometry
// estimate by the noisy version of the same increment.
inline SimState step_odometry(SimState state, const OdomNoise& noise, double dt,
                              const RobotParams& params = {}) {
  const Pose2D next = step_kinematics(state.true_pose, state.commanded, dt);
  apply_odometry(state, relative(state.true_pose, next), noise, params.wheel_separation);
  state.true_pose = next;
  state.time += dt;
  return state;
}

// ---------------------------------------------------------------------------
// Lidar

namespace detail {
inline double occupied_log_odds(const OccupancyGrid& g) { return log_odds(g.occupied_thresh); }
}  // namespace detail

// Range of the first occupied cell crossed by a ray, or nullopt.
inline std::optional<double> cast_ray(const OccupancyGrid& truth, double x, double y,
                                      double angle, double range_min, double range_max) {
  const double occ_l = detail::occupied_log_odds(truth);
  std::optional<double> hit;
  traverse_ray(truth, x, y, angle, range_max, [&](CellIndex c, double t_in, double t_out) {
    if (t_out <= range_min) return true;
    if (truth.cells[truth.index(c)] > occ_l) {
      hit = std::max(t_in, range_min);
      return false;
    }
    return true;
  });
  return hit;
}

// Unknown cells are transparent. Beams that hit nothing report range_max.
inline LaserScan simulate_lidar(const Pose2D& pose, const OccupancyGrid& truth,
                                const ScanConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (!world_to_cell(truth, pose)) {
    throw std::out_of_range("simulate_lidar: pose outside the map");
  }
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  LaserScan scan;
  scan.config = cfg;
  scan.ranges.assign(static_cast<std::size_t>(cfg.beam_count), cfg.range_max);
  for (int i = 0; i < cfg.beam_count; ++i) {
    const auto hit =
        cast_ray(truth, pose.x, pose.y, pose.theta + cfg.bearing(i), cfg.range_min, cfg.range_max);
    if (!hit) continue;
    double r = *hit;
    if (cfg.noise_sigma > 0.0) r += cfg.noise_sigma * noise(rng);
    scan.ranges[static_cast<std::size_t>(i)] = std::clamp(r, cfg.range_min, cfg.range_max);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Ticked simulator with contact handling

struct SimulatorOptions {
  RobotParams robot{};
  OdomNoise odom_noise{};
  double rate_hz = 10.0;
};

class Simulator {
 public:
  Simulator(OccupancyGrid truth, Pose2D start, std::uint64_t seed, SimulatorOptions opts = {})
      : truth_(std::move(truth)), opts_(opts), state_(start, seed) {
    truth_.validate();
    opts_.robot.validate();
    opts_.odom_noise.validate();
    if (!(opts_.rate_hz > 0.0)) throw std::invalid_argument("Simulator: rate must be > 0");
    if (!world_to_cell(truth_, start)) throw std::out_of_range("Simulator: start outside map");
    clearance_ = precompute_distance_field(truth_, 4.0 * opts_.robot.footprint_radius + 1.0);
  }

  const SimState& state() const { return state_; }
  const OccupancyGrid& truth() const { return truth_; }
  const SimulatorOptions& options() const { return opts_; }
  double dt() const { return 1.0 / opts_.rate_hz; }

  // Moves the robot for one tick. Motion that would bring the footprint into
  // an occupied cell stops at the last free sub-step and raises the collision
  // flag, which stays set until clear_collision().
  void tick(const Twist2D& command, std::optional<double> dt_override = std::nullopt) {
    const double dt = dt_override.value_or(this->dt());
    state_.commanded = limit_twist(command, opts_.robot);
    const Pose2D start = state_.true_pose;
    Pose2D pose = start;
    const double linear = std::abs(state_.commanded.v) * dt;
    const int substeps =
        std::max(1, static_cast<int>(std::ceil(linear / (truth_.resolution / 2.0))));
    const double h = dt / substeps;
    bool hit = false;
    for (int i = 0; i < substeps; ++i) {
      const Pose2D next = step_kinematics(pose, state_.commanded, h);
      if (in_contact(next)) {
        hit = true;
        break;
      }
      pose = next;
    }
    if (hit) {
      state_.collided = true;
      state_.commanded = {};
    }
    apply_odometry(state_, relative(start, pose), opts_.odom_noise,
                   opts_.robot.wheel_separation);
    state_.true_pose = pose;
    state_.time += dt;
  }

  LaserScan scan() {
    LaserScan s = simulate_lidar(state_.true_pose, truth_, opts_.robot.lidar, state_.rng());
    s.stamp = state_.time;
    return s;
  }

  bool in_contact(const Pose2D& p) const {
    if (!world_to_cell(truth_, p)) return true;
    return clearance_.at_world(p.x, p.y) < opts_.robot.footprint_radius;
  }

  void clear_collision() { state_.collided = false; }

  void reset(Pose2D start) {
    state_.true_pose = start;
    state_.odom_pose = start;
    state_.commanded = {};
    state_.collided = false;
  }

 private:
  OccupancyGrid truth_;
  SimulatorOptions opts_;
  SimState state_;
  DistanceField clearance_;
};

}  // namespace minibot

#endif  // MINIBOT_SIMULATOR_HPP_
