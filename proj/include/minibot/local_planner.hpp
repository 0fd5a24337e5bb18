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

#ifndef MINIBOT_LOCAL_PLANNER_HPP_
#define MINIBOT_LOCAL_PLANNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "minibot/costmap.hpp"
#include "minibot/global_planner.hpp"
#include "minibot/simulator.hpp"
#include "minibot/world.hpp"

namespace minibot {

struct CostWeights {
  double path_distance = 0.6;
  double goal_distance = 0.8;
  double obstacle = 0.01;
};

struct PlannerConfig {
  double min_vel_x = 0.1;       // m/s
  double max_vel_x = 0.5;       // m/s
  double max_rot_vel = 1.0;     // rad/s
  double min_in_place_rot_vel = 0.4;  // rad/s, slowest turn on the spot
  double acc_lim_x = 1.0;       // m/s^2
  double acc_lim_theta = 2.0;   // rad/s^2
  double sim_time = 1.7;        // s
  double sim_granularity = 0.025;  // m between collision checks
  double angular_granularity = 0.1;  // rad between collision checks
  int vx_samples = 6;
  int vtheta_samples = 20;
  double xy_goal_tolerance = 1.0;   // m
  double yaw_goal_tolerance = 1.0;  // rad
  double local_goal_lookahead = 1.5;  // m of path ahead used as the local goal
  CostWeights cost_weights{};

  void validate() const {
    if (!(min_vel_x >= 0.0) || !(min_vel_x <= max_vel_x)) {
      throw std::invalid_argument("PlannerConfig: need 0 <= min_vel_x <= max_vel_x");
    }
    if (!(xy_goal_tolerance > 0.0) || !(yaw_goal_tolerance > 0.0)) {
      throw std::invalid_argument("PlannerConfig: goal tolerances must be > 0");
    }
    if (vx_samples < 1 || vtheta_samples < 1) {
      throw std::invalid_argument("PlannerConfig: sample counts must be >= 1");
    }
    if (!(sim_time > 0.0) || !(max_rot_vel >= 0.0) || !(acc_lim_x > 0.0) ||
        !(acc_lim_theta > 0.0) || !(sim_granularity > 0.0) || !(angular_granularity > 0.0) ||
        !(min_in_place_rot_vel >= 0.0)) {
      throw std::invalid_argument("PlannerConfig: non-positive limit");
    }
  }
};

inline bool goal_reached(const Pose2D& pose, const Pose2D& goal, const PlannerConfig& cfg) {
  return planar_distance(pose, goal) <= cfg.xy_goal_tolerance &&
         std::abs(angle_diff(pose.theta, goal.theta)) <= cfg.yaw_goal_tolerance;
}

struct Trajectory {
  Twist2D twist{};
  std::vector<Pose2D> poses;  // excludes the start pose
  double score = 0.0;
  std::uint8_t max_cost = 0;
  bool collides = false;
};

struct LocalPlan {
  bool ok = false;
  Twist2D twist{};
  Trajectory best{};
  int evaluated = 0;
  int feasible = 0;
};

// Forward-simulates a constant twist for cfg.sim_time.
inline Trajectory rollout(const Costmap& cm, const Pose2D& start, const Twist2D& twist,
                          const PlannerConfig& cfg) {
  Trajectory t;
  t.twist = twist;
  const double lin = std::abs(twist.v) * cfg.sim_time;
  const double ang = std::abs(twist.w) * cfg.sim_time;
  const int steps = std::max(
      1, static_cast<int>(std::ceil(std::max(lin / cfg.sim_granularity,
                                             ang / cfg.angular_granularity))));
  const double h = cfg.sim_time / steps;
  Pose2D p = start;
  t.poses.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    p = step_kinematics(p, twist, h);
    const std::uint8_t c = cm.at_world(p.x, p.y);
    t.max_cost = std::max(t.max_cost, c);
    if (c >= kCostInscribed) {
      t.collides = true;
      return t;
    }
    t.poses.push_back(p);
  }
  return t;
}

// Index of the path pose nearest to `pose`.
inline std::size_t nearest_path_index(const Path& path, const Pose2D& pose) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = planar_distance(path[i], pose);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Index of the path pose `lookahead` metres of arc length past `from`.
inline std::size_t lookahead_index(const Path& path, std::size_t from, double lookahead) {
  double acc = 0.0;
  std::size_t i = from;
  while (i + 1 < path.size()) {
    acc += planar_distance(path[i], path[i + 1]);
    ++i;
    if (acc >= lookahead) break;
  }
  return i;
}

// Evenly spaced samples over [lo, hi]; a single sample takes `hi`.
inline std::vector<double> sample_range(double lo, double hi, int n) {
  if (n <= 1 || hi <= lo) return {hi};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

// Obstacle-aware distances over a window of the costmap: a 5-7 chamfer
// wavefront from a set of seed cells through cells below the inscribed band.
// Distances are reported in cells; cells the wave cannot reach are infinite.
class Wavefront {
 public:
  static constexpr std::int32_t kUnreached = std::numeric_limits<std::int32_t>::max();

  Wavefront(const Costmap& cm, int x0, int y0, int x1, int y1)
      : cm_(&cm),
        x0_(std::max(0, x0)),
        y0_(std::max(0, y0)),
        w_(std::max(0, std::min(cm.width - 1, x1) - x0_ + 1)),
        h_(std::max(0, std::min(cm.height - 1, y1) - y0_ + 1)),
        dist_(static_cast<std::size_t>(w_) * static_cast<std::size_t>(h_), kUnreached) {}

  bool contains(CellIndex c) const {
    return c.x >= x0_ && c.y >= y0_ && c.x < x0_ + w_ && c.y < y0_ + h_;
  }

  // Dial's algorithm; edge weights are 5 (axis) and 7 (diagonal).
  void propagate(const std::vector<CellIndex>& seeds) {
    constexpr int kBuckets = 8;
    std::vector<std::vector<std::size_t>> bucket(kBuckets);
    std::size_t queued = 0;
    for (const CellIndex& c : seeds) {
      if (!contains(c) || !open(c)) continue;
      const std::size_t i = local(c);
      if (dist_[i] == 0) continue;
      dist_[i] = 0;
      bucket[0].push_back(i);
      ++queued;
    }
    static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    for (std::int32_t d = 0; queued > 0; ++d) {
      auto& b = bucket[static_cast<std::size_t>(d % kBuckets)];
      while (!b.empty()) {
        const std::size_t i = b.back();
        b.pop_back();
        --queued;
        if (dist_[i] != d) continue;  // stale entry
        const int cx = static_cast<int>(i % static_cast<std::size_t>(w_)) + x0_;
        const int cy = static_cast<int>(i / static_cast<std::size_t>(w_)) + y0_;
        for (int k = 0; k < 8; ++k) {
          const CellIndex n{cx + kDx[k], cy + kDy[k]};
          if (!contains(n) || !open(n)) continue;
          const std::size_t ni = local(n);
          const std::int32_t nd = d + (k < 4 ? 5 : 7);
          if (nd < dist_[ni]) {
            dist_[ni] = nd;
            bucket[static_cast<std::size_t>(nd % kBuckets)].push_back(ni);
            ++queued;
          }
        }
      }
    }
  }

  double cells(CellIndex c) const {
    if (!contains(c)) return std::numeric_limits<double>::infinity();
    const std::int32_t d = dist_[local(c)];
    return d == kUnreached ? std::numeric_limits<double>::infinity() : d / 5.0;
  }

  // Bilinear blend of the four cell centres around a world point, so short
  // rollouts that end inside one cell still rank. Unreached corners drop out
  // of the blend; the point's own cell must be reached.
  double at(double x, double y) const {
    const auto own = cm_->cell_of(x, y);
    if (!own || !std::isfinite(cells(*own))) return std::numeric_limits<double>::infinity();
    const double gx = (x - cm_->origin.x) / cm_->resolution - 0.5;
    const double gy = (y - cm_->origin.y) / cm_->resolution - 0.5;
    const int ix = static_cast<int>(std::floor(gx));
    const int iy = static_cast<int>(std::floor(gy));
    const double fx = gx - ix;
    const double fy = gy - iy;
    double sum = 0.0;
    double weight = 0.0;
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double d = cells(CellIndex{ix + dx, iy + dy});
        const double wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
        if (!std::isfinite(d) || wgt <= 0.0) continue;
        sum += wgt * d;
        weight += wgt;
      }
    }
    return weight > 0.0 ? sum / weight : cells(*own);
  }

 private:
  bool open(CellIndex c) const {
    const std::uint8_t v = cm_->at(c.x, c.y);
    return v < kCostInscribed || v == kCostUnknown;
  }
  std::size_t local(CellIndex c) const {
    return static_cast<std::size_t>(c.y - y0_) * static_cast<std::size_t>(w_) +
           static_cast<std::size_t>(c.x - x0_);
  }

  const Costmap* cm_;
  int x0_, y0_, w_, h_;
  std::vector<std::int32_t> dist_;
};

// Trajectory rollout over the dynamic window reachable within one control
// period. Lower scores are better:
//   path_distance * d(end, path) + goal_distance * d(end, local goal)
//   + obstacle * max cost along the trajectory,
// with d the wavefront distance in metres, so a trajectory that cuts toward
// a goal on the far side of a wall gains nothing. Distances are in metres
// rather than cells so the balance against the obstacle term does not
// depend on the map resolution. Endpoints the wavefront cannot reach are
// rejected.
inline LocalPlan plan_local(const Costmap& cm, const Pose2D& pose, const Twist2D& current,
                            const Path& path, const PlannerConfig& cfg, double control_period) {
  if (path.empty()) throw std::invalid_argument("plan_local: empty path");
  LocalPlan out;
  const double dv = cfg.acc_lim_x * control_period;
  const double dw = cfg.acc_lim_theta * control_period;
  const double v_lo = std::clamp(current.v - dv, cfg.min_vel_x, cfg.max_vel_x);
  const double v_hi = std::clamp(current.v + dv, cfg.min_vel_x, cfg.max_vel_x);
  const double w_lo = std::clamp(current.w - dw, -cfg.max_rot_vel, cfg.max_rot_vel);
  const double w_hi = std::clamp(current.w + dw, -cfg.max_rot_vel, cfg.max_rot_vel);

  std::vector<double> vs = sample_range(v_lo, v_hi, cfg.vx_samples);
  std::reverse(vs.begin(), vs.end());  // fastest first wins ties
  std::vector<double> ws = sample_range(w_lo, w_hi, cfg.vtheta_samples);
  if (w_lo <= 0.0 && 0.0 <= w_hi && std::find(ws.begin(), ws.end(), 0.0) == ws.end()) {
    ws.insert(ws.begin(), 0.0);
  }

  // Window around the robot big enough for every rollout and the local goal.
  const double reach = std::max(cfg.local_goal_lookahead, cfg.sim_time * cfg.max_vel_x) + 0.5;
  const int half = static_cast<int>(std::ceil(reach / cm.resolution));
  const int rx = static_cast<int>(std::floor((pose.x - cm.origin.x) / cm.resolution));
  const int ry = static_cast<int>(std::floor((pose.y - cm.origin.y) / cm.resolution));
  Wavefront path_wave(cm, rx - half, ry - half, rx + half, ry + half);
  Wavefront goal_wave = path_wave;

  // Path cells from the nearest pose up to the local goal, which is cut
  // short where the path leaves the window.
  const std::size_t near = nearest_path_index(path, pose);
  std::size_t goal_i = lookahead_index(path, near, cfg.local_goal_lookahead);
  std::vector<CellIndex> path_cells;
  for (std::size_t i = near; i <= goal_i; ++i) {
    const auto c = cm.cell_of(path[i].x, path[i].y);
    if (!c || !path_wave.contains(*c)) {
      goal_i = i > near ? i - 1 : near;
      break;
    }
    path_cells.push_back(*c);
  }
  path_wave.propagate(path_cells);
  if (const auto g = cm.cell_of(path[goal_i].x, path[goal_i].y)) goal_wave.propagate({*g});

  std::vector<Twist2D> twists;
  for (double v : vs) {
    for (double w : ws) twists.push_back({v, w});
  }
  // Turns on the spot, when stopping fits in the window. Without them a
  // robot with min_vel_x > 0 cannot face a goal behind it. Slow turns are
  // raised to min_in_place_rot_vel, which may exceed the angular window.
  if (current.v - dv <= 0.0) {
    for (double w : ws) {
      if (w == 0.0) continue;
      const double spin = std::copysign(std::clamp(std::abs(w), cfg.min_in_place_rot_vel, cfg.max_rot_vel), w);
      if (std::none_of(twists.begin(), twists.end(), [&](const Twist2D& t) { return t.v == 0.0 && t.w == spin; })) {
        twists.push_back({0.0, spin});
      }
    }
  }

  const auto& wt = cfg.cost_weights;
  double best_score = std::numeric_limits<double>::infinity();
  for (const Twist2D& cmd : twists) {
    Trajectory t = rollout(cm, pose, cmd, cfg);
    ++out.evaluated;
    if (t.collides || t.poses.empty()) continue;
    const Pose2D& end = t.poses.back();
    const double path_d = path_wave.at(end.x, end.y);
    const double goal_d = goal_wave.at(end.x, end.y);
    if (!std::isfinite(path_d) || !std::isfinite(goal_d)) continue;
    ++out.feasible;
    t.score = (wt.path_distance * path_d + wt.goal_distance * goal_d) * cm.resolution +
              wt.obstacle * t.max_cost;
    if (t.score < best_score) {
      best_score = t.score;
      out.best = std::move(t);
      out.ok = true;
    }
  }
  if (out.ok) out.twist = out.best.twist;
  return out;
}

}  // namespace minibot

#endif  // MINIBOT_LOCAL_PLANNER_HPP_
