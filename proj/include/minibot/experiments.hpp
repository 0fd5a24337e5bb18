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

#ifndef MINIBOT_EXPERIMENTS_HPP_
#define MINIBOT_EXPERIMENTS_HPP_

// Small repeatable runs shared by the tests and the acceptance binary.

#include <cmath>
#include <cstdint>
#include <memory>

#include "minibot/demo_world.hpp"
#include "minibot/localization.hpp"
#include "minibot/simulator.hpp"

namespace minibot {

struct ConvergenceOptions {
  double offset_xy = 0.5;   // m, distance of the initial mean from the truth
  double offset_yaw = 0.3;  // rad
  int updates = 20;
  int max_ticks = 5000;
  AmclConfig amcl{};
  SimulatorOptions sim{};
};

struct ConvergenceResult {
  int updates = 0;
  double position_error = 0.0;
  double heading_error = 0.0;
  Pose2D truth{};
  Pose2D estimate{};
};

// Drives the closed loop in the demo world and runs the filter from an
// initial guess offset_xy away in a seed-dependent direction.
inline ConvergenceResult convergence_trial(std::shared_ptr<const OccupancyGrid> world,
                                           std::uint64_t seed,
                                           const ConvergenceOptions& opts = {}) {
  const Pose2D start = demo_loop_start();
  Simulator sim(*world, start, seed, opts.sim);
  Amcl amcl(world, opts.amcl, seed ^ 0x9e3779b97f4a7c15ULL);

  Rng pick(seed);
  const double dir = std::uniform_real_distribution<double>(-kPi, kPi)(pick);
  const double yaw_sign = (pick() & 1U) ? 1.0 : -1.0;
  const Pose2D guess(start.x + opts.offset_xy * std::cos(dir),
                     start.y + opts.offset_xy * std::sin(dir),
                     start.theta + yaw_sign * opts.offset_yaw);
  amcl.initialize(guess, PoseStd{opts.offset_xy, opts.offset_xy, opts.offset_yaw},
                  sim.state().odom_pose);
  amcl.process(sim.state().odom_pose, sim.scan());

  const Twist2D cmd = demo_loop_command();
  for (int i = 0; i < opts.max_ticks && amcl.updates() < opts.updates; ++i) {
    sim.tick(cmd);
    amcl.process(sim.state().odom_pose, sim.scan());
  }

  ConvergenceResult r;
  r.updates = amcl.updates();
  r.truth = sim.state().true_pose;
  r.estimate = amcl.estimate().pose;
  r.position_error = planar_distance(r.truth, r.estimate);
  r.heading_error = std::abs(angle_diff(r.estimate.theta, r.truth.theta));
  return r;
}

}  // namespace minibot

#endif  // MINIBOT_EXPERIMENTS_HPP_
