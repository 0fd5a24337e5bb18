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

// Acceptance gate: one PASS/FAIL line per headline property of the stack.
// Exit status is 0 when every criterion passes or fails only as a
// documented known limitation (see README), 1 otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "minibot/benchmark.hpp"
#include "minibot/cli.hpp"
#include "minibot/demo_world.hpp"
#include "minibot/distance_field.hpp"
#include "minibot/experiments.hpp"
#include "minibot/global_planner.hpp"
#include "minibot/map_io.hpp"
#include "minibot/mapping.hpp"
#include "minibot/navigator.hpp"
#include "minibot/simulator.hpp"
#include "oracles.hpp"

namespace {

using namespace minibot;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
  bool known_limitation = false;  // fails for a reason recorded in the README
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool within_ulps(double a, double b, int ulps = 4) {
  if (a == b) return true;
  return std::abs(a - b) <= ulps * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

Verdict kinematics() {
  double worst = 0.0;
  for (int steps : {1, 2, 3, 7, 10, 100, 1000, 10000}) {
    Pose2D p;
    const double dt = kTwoPi / steps;
    for (int i = 0; i < steps; ++i) p = step_kinematics(p, {1.0, 1.0}, dt);
    worst = std::max({worst, std::abs(p.x), std::abs(p.y), std::abs(angle_diff(p.theta, 0.0))});
  }
  const Twist2D spin = wheels_to_twist({6.0, -6.0}, RobotParams{});
  Pose2D q(0.3, -0.7, 0.2);
  for (int i = 0; i < 1000; ++i) q = step_kinematics(q, spin, 0.1);
  const double drift = std::hypot(q.x - 0.3, q.y + 0.7);
  return {worst <= 1e-9 && drift <= 1e-12,
          "circle closure error " + fmt("%.2g", worst) + " (limit 1e-9), spin drift " + fmt("%.2g", drift) +
              " m (limit 1e-12)"};
}

Verdict non_holonomic() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> v(-1.0, 1.0), w(-3.0, 3.0), dt(0.01, 0.5);
  Pose2D p;
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Twist2D t{v(rng), w(rng)};
    const double h = dt(rng);
    const Pose2D next = step_kinematics(p, t, h);
    // Each exact-arc step moves along its mid-step heading, never sideways.
    const double mid = p.theta + t.w * h / 2.0;
    worst = std::max(worst, std::abs((next.x - p.x) * std::sin(mid) - (next.y - p.y) * std::cos(mid)));
    p = next;
  }
  return {worst <= 1e-12, "max lateral displacement " + fmt("%.2g", worst) + " m over 10^4 steps (limit 1e-12)"};
}

Verdict wheel_equation() {
  const RobotParams robot{};  // r = 0.04 m, d = 0.1 m
  bool ok = true;
  const Twist2D a = wheels_to_twist({10.0, 5.0}, robot);
  ok &= within_ulps(a.v, 0.3) && within_ulps(a.w, 2.0);
  const Twist2D b = wheels_to_twist({7.0, 7.0}, robot);
  ok &= within_ulps(b.v, 0.28) && b.w == 0.0;
  const Twist2D c = wheels_to_twist({4.0, -4.0}, robot);
  ok &= c.v == 0.0 && within_ulps(c.w, 3.2);
  const WheelSpeeds d = twist_to_wheels({0.3, 2.0}, robot);
  ok &= within_ulps(d.right, 10.0) && within_ulps(d.left, 5.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-1.0, 1.0), w(-5.0, 5.0);
  int round_trips = 0;
  for (int i = 0; i < 100; ++i) {
    const Twist2D t{v(rng), w(rng)};
    const Twist2D back = wheels_to_twist(twist_to_wheels(t, robot), robot);
    if (within_ulps(back.v, t.v) && std::abs(back.w - t.w) <= 4e-15 * std::max(1.0, std::abs(t.w))) ++round_trips;
  }
  return {ok && round_trips == 100, std::string("hand cases ") + (ok ? "match" : "differ") + ", " +
                                        std::to_string(round_trips) + "/100 twists round-trip (to 4 ulp)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict map_format() {
  const fs::path dir = fs::temp_directory_path() / ("minibot_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const OccupancyGrid g = make_demo_world(0.01);
  save_map(g, dir / "a");
  save_map(load_map(dir / "a"), dir / "b");
  const bool pgm_same = slurp(dir / "a.pgm") == slurp(dir / "b.pgm");
  std::string ya = slurp(dir / "a.yaml");
  const std::string yb = slurp(dir / "b.yaml");
  fs::remove_all(dir);
  const bool resolution = ya.find("resolution: 0.010000\n") != std::string::npos;
  const bool thresholds =
      ya.find("occupied_thresh: 0.65\n") != std::string::npos && ya.find("free_thresh: 0.196\n") != std::string::npos;
  int keys = 0;
  for (const char* k : {"image:", "resolution:", "origin:", "negate:", "occupied_thresh:", "free_thresh:"}) {
    keys += ya.find(std::string("\n") + k) != std::string::npos || ya.rfind(k, 0) == 0;
  }
  ya.replace(ya.find("a.pgm"), 5, "b.pgm");
  const bool yaml_same = ya == yb;
  return {pgm_same && yaml_same && resolution && thresholds && keys == 6,
          std::string("save-load-save ") + (pgm_same && yaml_same ? "byte-identical" : "differs") + ", " +
              std::to_string(keys) + "/6 YAML keys, resolution " + (resolution ? "0.010000" : "misformatted") +
              ", thresholds " + (thresholds ? "0.65/0.196" : "wrong")};
}

Verdict mapping_accuracy() {
  const OccupancyGrid world = make_demo_world(0.01);
  OccupancyGrid map(world.width, world.height, world.resolution, world.origin);
  SimulatorOptions so;
  so.odom_noise = OdomNoise{0.0, 0.0, 0.0};
  Simulator sim(world, demo_loop_start(), 1, so);
  const int ticks = static_cast<int>(std::ceil(kTwoPi / demo_loop_command().w / sim.dt()));
  for (int i = 0; i <= ticks; ++i) {
    integrate_scan(map, sim.state().true_pose, sim.scan());
    sim.tick(demo_loop_command());
  }
  int observed = 0, correct = 0;
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map.cells[i] == 0.0) continue;
    ++observed;
    correct += map.classify(i) == world.classify(i);
  }
  const double acc = observed > 0 ? static_cast<double>(correct) / observed : 0.0;
  return {acc >= 0.95, fmt("%.2f%%", 100.0 * acc) + " of " + std::to_string(observed) +
                           " observed cells correct at 0.01 m/cell (need 95%)"};
}

Verdict localization() {
  auto world = std::make_shared<const OccupancyGrid>(make_demo_world(0.01));
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ConvergenceResult r = convergence_trial(world, seed);
    const bool good = r.updates == 20 && r.position_error < 3 * world->resolution && r.heading_error < 0.1;
    ok += good;
    worst = std::max(worst, r.position_error);
  }
  return {ok >= 9, std::to_string(ok) + "/10 seeds within 3 cells and 0.1 rad after 20 updates (need 9), worst " +
                       fmt("%.3f", worst) + " m"};
}

Verdict planner_oracle() {
  Rng rng(2026);
  int planned = 0, matched = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Costmap cm = oracle::random_costmap(rng);
    std::uniform_int_distribution<int> u(0, 49);
    CellIndex s, g;
    do s = {u(rng), u(rng)};
    while (!traversable(cm.at(s.x, s.y)));
    do g = {u(rng), u(rng)};
    while (!traversable(cm.at(g.x, g.y)));
    const Point2D ps = cm.center(s), pg = cm.center(g);
    const GlobalPlan plan = plan_global(cm, Pose2D(ps.x, ps.y, 0), Pose2D(pg.x, pg.y, 0));
    const auto best = oracle::dijkstra(cm, s, g);
    if (plan.ok != best.has_value()) continue;
    if (!best) {
      ++matched;
      continue;
    }
    ++planned;
    matched += plan.cost == *best;
  }
  Rng grid_rng(11);
  std::bernoulli_distribution occ(0.08);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    OccupancyGrid g(20, 20, 0.01);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 20; ++x) {
        if (occ(grid_rng)) g.set_class(x, y, CellClass::kOccupied);
      }
    }
    const DistanceField f = precompute_distance_field(g, 0.1);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 20; ++x) worst = std::max(worst, std::abs(f.at(x, y) - oracle::brute_distance(g, x, y, 0.1)));
    }
  }
  return {matched == 20 && worst <= 0.01,
          "A* equals Dijkstra on " + std::to_string(matched) + "/20 costmaps (" + std::to_string(planned) +
              " with a path); distance field off by at most " + fmt("%.2g", worst) + " m (one cell = 0.01)"};
}

Verdict benchmark_structure() {
  BenchmarkOptions opts;  // doorway course, 0.01 m/cell, seed 1
  const auto rows = run_benchmark(default_speed_pairs(), opts);
  std::fputs(format_benchmark_table(rows).c_str(), stdout);
  auto find = [&](double lo, double hi) -> const BenchmarkRow& {
    for (const auto& r : rows) {
      if (r.pair.min_vel_x == lo && r.pair.max_vel_x == hi) return r;
    }
    throw std::logic_error("missing benchmark row");
  };
  bool ordering = true;
  bool fails_at_1 = true;
  for (double lo : {0.01, 0.1}) {
    const auto& slow = find(lo, 0.1);
    const auto& mid = find(lo, 0.5);
    ordering &= slow.outcome == Outcome::kReached && mid.outcome == Outcome::kReached && mid.time < slow.time;
    const auto& fast = find(lo, 1.0);
    fails_at_1 &= fast.outcome == Outcome::kCollision || fast.outcome == Outcome::kAborted;
  }
  Verdict v;
  v.pass = ordering && fails_at_1;
  v.detail = std::string("(a) time(0.5) < time(0.1) for both min values: ") + (ordering ? "holds" : "does not hold") +
             "; (b) failure at max_vel_x 1.0: " + (fails_at_1 ? "reproduced" : "not reproduced, both runs reach the goal");
  // (b) is the documented limitation; (a) failing would be a real failure.
  v.known_limitation = ordering && !fails_at_1;
  return v;
}

Verdict goal_protocol() {
  const OccupancyGrid world = make_demo_world(0.05);
  auto run = [&](const std::function<GoalState(Navigator&, Simulator&)>& scenario) {
    Simulator sim(world, Pose2D(-3.5, -3.5, 0.0), 1);
    Navigator nav(std::make_shared<const Costmap>(inflate(world)), PlannerConfig{}, sim.dt());
    return scenario(nav, sim);
  };
  auto settle = [](Navigator& nav, Simulator& sim, GoalHandle h, int max_ticks) {
    for (int i = 0; i < max_ticks && !is_terminal(nav.goals().status(h).state); ++i) {
      sim.tick(nav.tick(sim.state().true_pose, sim.state().collided, sim.dt()).twist);
    }
    return nav.goals().status(h).state;
  };
  const GoalState succeeded = run([&](Navigator& nav, Simulator& sim) {
    return settle(nav, sim, nav.send_goal(NavGoal{GoalFrame::kRobot, 2.0, 0.0, 1.0}, sim.state().true_pose), 2000);
  });
  const GoalState aborted = run([&](Navigator& nav, Simulator& sim) {
    return settle(nav, sim, nav.send_goal(Pose2D(0.0, -2.0, 0.0)), 10);  // inside the interior wall
  });
  const GoalState preempted = run([&](Navigator& nav, Simulator& sim) {
    const GoalHandle first = nav.send_goal(Pose2D(3.5, -3.5, 0.0));
    settle(nav, sim, first, 20);
    const GoalHandle second = nav.send_goal(Pose2D(-3.5, -1.5, kPi / 2));
    if (settle(nav, sim, second, 2000) != GoalState::kSucceeded) return GoalState::kActive;
    return nav.goals().status(first).state;
  });

  Stack stack(world, demo_course().start, 1, StackOptions{}, world);
  cli::LocalGoalClient client(stack);
  std::ostringstream out, err;
  const int code = cli::run_navigate({"1", "1"}, client, out, err);
  static const std::regex line(R"(^\[INFO\] \[[0-9.]+, [0-9.]+\]: (.*)$)");
  std::vector<std::string> msgs;
  std::istringstream in(out.str());
  for (std::string l; std::getline(in, l);) {
    std::smatch m;
    msgs.push_back(std::regex_match(l, m, line) ? std::string(m[1]) : "?" + l);
  }
  const std::vector<std::string> expected{"Set X = 1", "Set W = 1", "Waiting for server", "Sending Goals",
                                          "Waiting for server", "Result: Succeeded"};
  const bool log_ok = code == 0 && msgs == expected;
  const bool states_ok = succeeded == GoalState::kSucceeded && aborted == GoalState::kAborted &&
                         preempted == GoalState::kPreempted;
  return {states_ok && log_ok, std::string("runs ended ") + std::string(to_string(succeeded)) + " / " +
                                   std::string(to_string(aborted)) + " / " + std::string(to_string(preempted)) +
                                   "; navigate 1 1 log order " + (log_ok ? "matches" : "differs")};
}

struct Criterion {
  const char* name;
  double time_limit;  // seconds, 0 for none
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"kinematics exactness", 1.0, kinematics},
      {"non-holonomic constraint", 0.0, non_holonomic},
      {"wheel equation oracle", 0.0, wheel_equation},
      {"map file format", 0.0, map_format},
      {"mapping accuracy", 10.0, mapping_accuracy},
      {"localization convergence", 30.0, localization},
      {"planner oracles", 0.0, planner_oracle},
      {"benchmark table structure", 300.0, benchmark_structure},
      {"goal protocol", 0.0, goal_protocol},
  };
  int passed = 0, known = 0, failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string detail = v.detail + "; " + fmt("%.1f s", secs);
    if (c.time_limit > 0.0) {
      detail += " (limit " + fmt("%g", c.time_limit) + " s)";
      if (secs >= c.time_limit) {
        v.pass = false;
        v.known_limitation = false;
      }
    }
    if (v.pass) ++passed;
    else if (v.known_limitation) ++known;
    else ++failed;
    std::printf("%s %s: %s%s\n", v.pass ? "PASS" : "FAIL", c.name, detail.c_str(),
                !v.pass && v.known_limitation ? " [known limitation]" : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass, %d known limitation(s), %d unexpected failure(s)\n", passed, criteria.size(),
              known, failed);
  return failed == 0 ? 0 : 1;
}
