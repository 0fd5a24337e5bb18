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

#include "minibot/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "minibot/demo_world.hpp"

namespace minibot {
namespace {

const RobotParams kPaperRobot{};  // r = 0.04 m, d = 0.1 m

TEST(WheelsToTwistTest, HandEvaluatedCases) {
  const Twist2D t = wheels_to_twist({10.0, 5.0}, kPaperRobot);
  EXPECT_DOUBLE_EQ(t.v, 0.3);
  EXPECT_DOUBLE_EQ(t.w, 2.0);

  const Twist2D straight = wheels_to_twist({7.0, 7.0}, kPaperRobot);
  EXPECT_DOUBLE_EQ(straight.v, 0.04 * 7.0);
  EXPECT_EQ(straight.w, 0.0);

  const Twist2D spin = wheels_to_twist({4.0, -4.0}, kPaperRobot);
  EXPECT_EQ(spin.v, 0.0);
  EXPECT_GT(spin.w, 0.0);
}

TEST(WheelsToTwistTest, IsLinear) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_int_distribution<int> k(-4, 4);
  for (int i = 0; i < 50; ++i) {
    const WheelSpeeds a{u(rng), u(rng)};
    const WheelSpeeds b{u(rng), u(rng)};
    // Power-of-two coefficients keep the scaling itself exact.
    const double ca = std::ldexp(1.0, k(rng));
    const double cb = std::ldexp(1.0, k(rng));
    const Twist2D lhs = wheels_to_twist({ca * a.right + cb * b.right, ca * a.left + cb * b.left},
                                        kPaperRobot);
    const Twist2D ta = wheels_to_twist(a, kPaperRobot);
    const Twist2D tb = wheels_to_twist(b, kPaperRobot);
    EXPECT_NEAR(lhs.v, ca * ta.v + cb * tb.v, 1e-12);
    EXPECT_NEAR(lhs.w, ca * ta.w + cb * tb.w, 1e-12);
  }
}

TEST(TwistToWheelsTest, Examples) {
  const WheelSpeeds ws = twist_to_wheels({0.3, 2.0}, kPaperRobot);
  EXPECT_DOUBLE_EQ(ws.right, 10.0);
  EXPECT_DOUBLE_EQ(ws.left, 5.0);
  const WheelSpeeds straight = twist_to_wheels({0.04 * 3.0, 0.0}, kPaperRobot);
  EXPECT_DOUBLE_EQ(straight.right, 3.0);
  EXPECT_DOUBLE_EQ(straight.left, 3.0);
}

TEST(TwistToWheelsTest, RoundTripsRandomTwists) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  std::uniform_real_distribution<double> w(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const Twist2D t{v(rng), w(rng)};
    const Twist2D back = wheels_to_twist(twist_to_wheels(t, kPaperRobot), kPaperRobot);
    EXPECT_DOUBLE_EQ(back.v, t.v);
    EXPECT_NEAR(back.w, t.w, 4e-15 * std::max(1.0, std::abs(t.w)));
  }
}

TEST(TwistToWheelsTest, SaturationPreservesTurningRadius) {
  RobotParams p = kPaperRobot;
  p.max_wheel_speed = 10.0;
  const Twist2D req{1.0, 4.0};
  const WheelSpeeds ws = twist_to_wheels(req, p);
  EXPECT_NEAR(std::max(std::abs(ws.right), std::abs(ws.left)), 10.0, 1e-12);
  const Twist2D got = wheels_to_twist(ws, p);
  EXPECT_NEAR(got.v / got.w, req.v / req.w, 1e-12);
}

TEST(StepKinematicsTest, Examples) {
  const Pose2D a = step_kinematics({}, {1.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(a.x, 1.0);
  EXPECT_EQ(a.y, 0.0);
  EXPECT_EQ(a.theta, 0.0);

  const Pose2D b = step_kinematics({}, {0.0, kPi / 2.0}, 1.0);
  EXPECT_EQ(b.x, 0.0);
  EXPECT_EQ(b.y, 0.0);
  EXPECT_DOUBLE_EQ(b.theta, kPi / 2.0);

  EXPECT_THROW(step_kinematics({}, {1.0, 0.0}, 0.0), std::invalid_argument);
}

TEST(StepKinematicsTest, MatchesAnalyticArc) {
  // Unit circle centred at (0, 1): x = sin t, y = 1 - cos t.
  for (double t : {0.1, 1.0, 2.5, 4.0}) {
    const Pose2D p = step_kinematics({}, {1.0, 1.0}, t);
    EXPECT_NEAR(p.x, std::sin(t), 1e-14);
    EXPECT_NEAR(p.y, 1.0 - std::cos(t), 1e-14);
    EXPECT_NEAR(p.theta, normalize_angle(t), 1e-14);
  }
}

TEST(StepKinematicsTest, CircleClosesForAnySubdivision) {
  for (int steps : {1, 2, 3, 7, 10, 100, 1000, 10000}) {
    Pose2D p;
    const double dt = kTwoPi / steps;
    for (int i = 0; i < steps; ++i) p = step_kinematics(p, {1.0, 1.0}, dt);
    EXPECT_NEAR(p.x, 0.0, 1e-9) << steps;
    EXPECT_NEAR(p.y, 0.0, 1e-9) << steps;
    EXPECT_NEAR(angle_diff(p.theta, 0.0), 0.0, 1e-9) << steps;
  }
}

TEST(StepKinematicsTest, PureSpinDoesNotTranslate) {
  const Twist2D spin = wheels_to_twist({6.0, -6.0}, kPaperRobot);
  Pose2D p(0.3, -0.7, 0.2);
  for (int i = 0; i < 1000; ++i) p = step_kinematics(p, spin, 0.1);
  EXPECT_NEAR(p.x, 0.3, 1e-12);
  EXPECT_NEAR(p.y, -0.7, 1e-12);
}

TEST(StepKinematicsTest, ChordHasNoLateralComponent) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  std::uniform_real_distribution<double> w(-3.0, 3.0);
  std::uniform_real_distribution<double> dt(0.01, 0.5);
  Pose2D p;
  for (int i = 0; i < 2000; ++i) {
    const Twist2D t{v(rng), w(rng)};
    const double h = dt(rng);
    const Pose2D next = step_kinematics(p, t, h);
    const double mid = p.theta + t.w * h / 2.0;
    const double dx = next.x - p.x;
    const double dy = next.y - p.y;
    EXPECT_LE(std::abs(dx * std::sin(mid) - dy * std::cos(mid)), 1e-12);
    p = next;
  }
}

TEST(StepOdometryTest, ZeroNoiseTracksTruth) {
  SimState s(Pose2D{1.0, 2.0, 0.3}, 42);
  s.commanded = {0.4, 0.7};
  const OdomNoise none{0.0, 0.0, 0.0};
  for (int i = 0; i < 500; ++i) s = step_odometry(s, none, 0.1);
  EXPECT_NEAR(s.odom_pose.x, s.true_pose.x, 1e-9);
  EXPECT_NEAR(s.odom_pose.y, s.true_pose.y, 1e-9);
  EXPECT_NEAR(angle_diff(s.odom_pose.theta, s.true_pose.theta), 0.0, 1e-9);
  EXPECT_NEAR(s.time, 50.0, 1e-9);
}

TEST(StepOdometryTest, SeededRunsAreIdentical) {
  auto run = [](std::uint64_t seed) {
    SimState s({}, seed);
    s.commanded = {0.3, 0.2};
    std::vector<Pose2D> out;
    for (int i = 0; i < 200; ++i) {
      s = step_odometry(s, OdomNoise{}, 0.1);
      out.push_back(s.odom_pose);
    }
    return out;
  };
  EXPECT_EQ(run(17), run(17));
  EXPECT_NE(run(17), run(18));
}

TEST(StepOdometryTest, IncrementVarianceMatchesCovariance) {
  SimState s({}, 1234);
  s.commanded = {1.0, 0.0};
  const OdomNoise defaults{};
  std::vector<double> err;
  for (int i = 0; i < 1000; ++i) {
    const Pose2D before = s.odom_pose;
    s = step_odometry(s, defaults, 1.0);
    err.push_back(relative(before, s.odom_pose).x - 1.0);
  }
  double mean = 0.0;
  for (double e : err) mean += e;
  mean /= err.size();
  double var = 0.0;
  for (double e : err) var += (e - mean) * (e - mean);
  var /= (err.size() - 1);
  EXPECT_NEAR(var, 1e-4, 0.3e-4);
}

// Fine fixed-step ray march used as an independent reference.
double march(const OccupancyGrid& g, const Pose2D& p, double angle, const ScanConfig& cfg) {
  const double step = 1e-4;
  for (double t = cfg.range_min; t < cfg.range_max; t += step) {
    const auto c = world_to_cell(g, p.x + t * std::cos(angle), p.y + t * std::sin(angle));
    if (!c) return cfg.range_max;
    if (g.is_occupied(c->x, c->y)) return t;
  }
  return cfg.range_max;
}

ScanConfig noiseless(int beams = 360) {
  ScanConfig c;
  c.beam_count = beams;
  c.noise_sigma = 0.0;
  return c;
}

TEST(SimulateLidarTest, EmptyMapReturnsSentinels) {
  const OccupancyGrid g(200, 200, 0.05, Pose2D{-5.0, -5.0, 0.0});
  const LaserScan s = simulate_lidar({}, g, ScanConfig{}, 1);
  ASSERT_EQ(s.ranges.size(), 360u);
  for (std::size_t i = 0; i < s.ranges.size(); ++i) EXPECT_TRUE(s.is_sentinel(i));
}

TEST(SimulateLidarTest, WallAhead) {
  OccupancyGrid g(200, 200, 0.05, Pose2D{-5.0, -5.0, 0.0});
  fill_box(g, {2.0, -5.0, 2.05, 5.0});
  const LaserScan s = simulate_lidar({}, g, noiseless(), 1);
  // Beam 180 has bearing 0 (angle_min = -pi).
  EXPECT_NEAR(s.config.bearing(180), 0.0, 1e-12);
  EXPECT_NEAR(s.ranges[180], 2.0, 0.05);
  EXPECT_TRUE(s.is_sentinel(0));  // facing away from the wall
}

TEST(SimulateLidarTest, WallBehindOnly) {
  OccupancyGrid g(200, 200, 0.05, Pose2D{-5.0, -5.0, 0.0});
  fill_box(g, {-1.55, -5.0, -1.5, 5.0});
  const LaserScan s = simulate_lidar({}, g, noiseless(), 1);
  EXPECT_TRUE(s.is_sentinel(180));
  EXPECT_NEAR(s.ranges[0], 1.5, 0.05);
}

TEST(SimulateLidarTest, AgreesWithFineRayMarch) {
  std::mt19937_64 rng(21);
  OccupancyGrid g(120, 120, 0.05, Pose2D{-3.0, -3.0, 0.0});
  std::bernoulli_distribution occ(0.03);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (occ(rng)) g.set_class(i, CellClass::kOccupied);
  }
  const ScanConfig cfg = noiseless(97);
  for (int trial = 0; trial < 5; ++trial) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Pose2D p(u(rng), u(rng), 3.0 * u(rng));
    const auto c = world_to_cell(g, p);
    g.set_class(c->x, c->y, CellClass::kFree);
    const LaserScan s = simulate_lidar(p, g, cfg, 0);
    for (int i = 0; i < cfg.beam_count; ++i) {
      const double ref = march(g, p, p.theta + cfg.bearing(i), cfg);
      EXPECT_NEAR(s.ranges[i], ref, 2e-4) << "beam " << i;
    }
  }
}

TEST(SimulateLidarTest, RangesStayInBounds) {
  const OccupancyGrid world = make_demo_world(0.05);
  ScanConfig cfg;
  cfg.noise_sigma = 0.5;  // large noise exercises the clamp
  const LaserScan s = simulate_lidar(Pose2D{-2.0, 0.0, 0.3}, world, cfg, 99);
  for (double r : s.ranges) {
    EXPECT_GE(r, cfg.range_min);
    EXPECT_LE(r, cfg.range_max);
  }
}

TEST(SimulateLidarTest, RejectsPoseOutsideMap) {
  const OccupancyGrid g(10, 10, 0.1);
  EXPECT_THROW(simulate_lidar(Pose2D{5.0, 5.0, 0.0}, g, ScanConfig{}, 0), std::out_of_range);
}

TEST(SimulatorTest, StopsAtWallAndFlagsCollision) {
  OccupancyGrid g(200, 200, 0.05, Pose2D{-5.0, -5.0, 0.0});
  fill_box(g, {-5.0, -5.0, 5.0, 5.0}, CellClass::kFree);
  fill_box(g, {1.0, -5.0, 1.1, 5.0});
  Simulator sim(g, Pose2D{}, 1);
  for (int i = 0; i < 50 && !sim.state().collided; ++i) sim.tick({0.5, 0.0});
  EXPECT_TRUE(sim.state().collided);
  EXPECT_LT(sim.state().true_pose.x, 1.0 - sim.options().robot.footprint_radius + 0.05);
  EXPECT_GT(sim.state().true_pose.x, 0.8);
  const double x = sim.state().true_pose.x;
  sim.tick({0.5, 0.0});
  EXPECT_EQ(sim.state().true_pose.x, x);
}

TEST(SimulatorTest, ReplayIsDeterministic) {
  const OccupancyGrid world = make_demo_world(0.05);
  auto run = [&](std::uint64_t seed) {
    Simulator sim(world, Pose2D{-3.0, -3.0, 0.0}, seed);
    std::vector<double> trace;
    for (int i = 0; i < 100; ++i) {
      sim.tick({0.3, 0.4 * std::sin(i * 0.1)});
      const LaserScan s = sim.scan();
      trace.push_back(sim.state().odom_pose.x);
      trace.push_back(s.ranges[17]);
    }
    return trace;
  };
  EXPECT_EQ(run(4), run(4));
}

}  // namespace
}  // namespace minibot
