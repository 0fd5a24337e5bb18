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

#ifndef MINIBOT_BENCHMARK_HPP_
#define MINIBOT_BENCHMARK_HPP_

// Time-to-goal over (min_vel_x, max_vel_x) pairs on a fixed course, with the
// full stack (simulator, AMCL, navigation) in the loop. Times are simulated
// seconds, so a run is a pure function of (seed, options, course).

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "minibot/demo_world.hpp"
#include "minibot/stack.hpp"

namespace minibot {

struct SpeedPair {
  double min_vel_x = 0.1;
  double max_vel_x = 0.5;
};

// min_vel_x in {0.01, 0.1} crossed with max_vel_x in {0.1, 0.5, 1.0}.
inline std::vector<SpeedPair> default_speed_pairs() {
  std::vector<SpeedPair> out;
  for (double lo : {0.01, 0.1}) {
    for (double hi : {0.1, 0.5, 1.0}) out.push_back({lo, hi});
  }
  return out;
}

enum class Outcome { kReached, kCollision, kAborted, kTimeout };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kReached: return "reached";
    case Outcome::kCollision: return "collision";
    case Outcome::kAborted: return "aborted";
    case Outcome::kTimeout: return "timeout";
  }
  return "unknown";
}

struct BenchmarkRow {
  SpeedPair pair;
  Outcome outcome = Outcome::kTimeout;
  double time = 0.0;  // simulated seconds from goal submission to the outcome
  std::string reason;
};

struct BenchmarkOptions {
  std::string course = "doorway";
  std::uint64_t seed = 1;
  double timeout = 600.0;     // simulated seconds
  double resolution = 0.01;   // demo world resolution
  StackOptions stack{};
};

inline BenchmarkRow run_benchmark_case(const OccupancyGrid& world, const Course& course,
                                       SpeedPair pair, const BenchmarkOptions& opts) {
  StackOptions so = opts.stack;
  so.planner.min_vel_x = pair.min_vel_x;
  so.planner.max_vel_x = pair.max_vel_x;
  Stack stack(world, course.start, opts.seed, so, world);

  BenchmarkRow row;
  row.pair = pair;
  const Ack ack = stack.submit(GoalCommand{NavGoal{GoalFrame::kMap, course.goal.x, course.goal.y,
                                                   std::cos(course.goal.theta / 2.0)}});
  if (!ack.accepted) {
    row.outcome = Outcome::kAborted;
    row.reason = ack.reason;
    return row;
  }
  const double t0 = stack.sim().state().time;
  while (stack.sim().state().time - t0 < opts.timeout) {
    const bool hit_before = stack.sim().state().collided;
    stack.step();
    const GoalStatus st = *stack.goal_status(*ack.handle);
    if (!is_terminal(st.state) && !(stack.sim().state().collided && !hit_before)) continue;
    row.time = stack.sim().state().time - t0;
    row.reason = st.reason;
    if (st.state == GoalState::kSucceeded) {
      row.outcome = Outcome::kReached;
    } else if (stack.sim().state().collided || st.reason == "collision") {
      row.outcome = Outcome::kCollision;
      if (row.reason.empty()) row.reason = "hit an obstacle";
    } else {
      row.outcome = Outcome::kAborted;
    }
    return row;
  }
  row.time = opts.timeout;
  row.reason = "no result within the time limit";
  return row;
}

inline std::vector<BenchmarkRow> run_benchmark(const std::vector<SpeedPair>& pairs,
                                               const BenchmarkOptions& opts) {
  const Course course = demo_course(opts.course);
  const OccupancyGrid world = make_demo_world(opts.resolution);
  std::vector<BenchmarkRow> rows;
  rows.reserve(pairs.size());
  for (const SpeedPair& p : pairs) rows.push_back(run_benchmark_case(world, course, p, opts));
  return rows;
}

inline std::string format_time(const BenchmarkRow& r) {
  if (r.outcome != Outcome::kReached) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", r.time);
  return buf;
}

// Human-readable, column aligned.
inline std::string format_benchmark_table(const std::vector<BenchmarkRow>& rows) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %-10s %-10s %-10s %s\n", "min_vel_x", "max_vel_x",
                "time_s", "outcome", "note");
  out += buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10g %-10g %-10s %-10s %s\n", r.pair.min_vel_x,
                  r.pair.max_vel_x, format_time(r).c_str(), std::string(to_string(r.outcome)).c_str(),
                  r.outcome == Outcome::kReached ? "" : r.reason.c_str());
    std::string line(buf);
    line.erase(line.find_last_not_of(" \n") + 1);
    out += line + "\n";
  }
  return out;
}

// One tab-separated line per row, prefixed so it can be grepped out of logs.
inline std::string format_benchmark_rows(const std::vector<BenchmarkRow>& rows) {
  std::string out;
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "ROW\t%g\t%g\t%s\t%.3f\n", r.pair.min_vel_x, r.pair.max_vel_x,
                  std::string(to_string(r.outcome)).c_str(), r.time);
    out += buf;
  }
  return out;
}

}  // namespace minibot

#endif  // MINIBOT_BENCHMARK_HPP_
