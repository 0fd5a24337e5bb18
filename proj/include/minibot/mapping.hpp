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

#ifndef MINIBOT_MAPPING_HPP_
#define MINIBOT_MAPPING_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "minibot/grid_traversal.hpp"
#include "minibot/world.hpp"

namespace minibot {

// Inverse sensor model increments (p_hit ~ 0.7, p_miss ~ 0.4).
inline constexpr double kLogOddsHit = 0.85;
inline constexpr double kLogOddsMiss = -0.4;

struct InverseSensorModel {
  double hit = kLogOddsHit;
  double miss = kLogOddsMiss;
};

// Log-odds update of every cell crossed by the scan. Cells strictly before a
// beam's endpoint are marked free, the cell containing the endpoint occupied.
// Max-range beams only clear. Beams leaving the grid are cut at the border.
inline void integrate_scan(OccupancyGrid& grid, const Pose2D& pose, const LaserScan& scan,
                           const InverseSensorModel& model = {}) {
  if (!world_to_cell(grid, pose)) {
    throw std::out_of_range("integrate_scan: pose outside the map");
  }
  const ScanConfig& cfg = scan.config;
  auto add = [&grid](CellIndex c, double delta) {
    double& l = grid.cells[grid.index(c)];
    l = std::clamp(l + delta, kLogOddsMin, kLogOddsMax);
  };
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double r = scan.ranges[i];
    const double angle = pose.theta + cfg.bearing(static_cast<int>(i));
    if (scan.is_sentinel(i)) {
      traverse_ray(grid, pose.x, pose.y, angle, cfg.range_max, [&](CellIndex c, double, double) {
        add(c, model.miss);
        return true;
      });
      continue;
    }
    // Walk slightly past the endpoint so the cell containing it is visited.
    traverse_ray(grid, pose.x, pose.y, angle, r + grid.resolution,
                 [&](CellIndex c, double t_in, double t_out) {
                   if (t_out <= r) {
                     add(c, model.miss);
                     return true;
                   }
                   if (t_in <= r) add(c, model.hit);
                   return false;
                 });
  }
}

// ---------------------------------------------------------------------------
// Scan matching

struct ScanMatchResult {
  Pose2D pose{};
  double score = 0.0;
};

struct ScanMatchOptions {
  double translation_cells = 3.0;  // initial translation step
  double rotation = 0.05;          // initial rotation step, rad
  int passes = 3;                  // each pass halves both steps
  int max_iterations_per_pass = 20;
  int kernel_cells = 2;            // neighbourhood searched around an endpoint
};

namespace detail {

struct Endpoint {
  double range;
  double bearing;
};

inline std::vector<Endpoint> scan_endpoints(const LaserScan& scan) {
  std::vector<Endpoint> out;
  out.reserve(scan.ranges.size());
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    if (scan.is_sentinel(i)) continue;
    out.push_back({scan.ranges[i], scan.config.bearing(static_cast<int>(i))});
  }
  return out;
}

}  // namespace detail

// Sum over beam endpoints of the best occupied-cell likelihood in a small
// neighbourhood: exp(-d^2 / 2 res^2) for the nearest occupied cell within
// `kernel_cells`, zero when none is close.
inline double scan_match_score(const OccupancyGrid& grid, const Pose2D& pose,
                               const std::vector<detail::Endpoint>& endpoints, int kernel_cells) {
  const double occ_l = log_odds(grid.occupied_thresh);
  const double res = grid.resolution;
  double total = 0.0;
  for (const auto& e : endpoints) {
    const double a = pose.theta + e.bearing;
    const double ex = pose.x + e.range * std::cos(a);
    const double ey = pose.y + e.range * std::sin(a);
    const double gx = (ex - grid.origin.x) / res;
    const double gy = (ey - grid.origin.y) / res;
    if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= grid.width || gy >= grid.height) continue;
    const int cx = static_cast<int>(gx);
    const int cy = static_cast<int>(gy);
    double best_sq = -1.0;
    for (int dy = -kernel_cells; dy <= kernel_cells; ++dy) {
      for (int dx = -kernel_cells; dx <= kernel_cells; ++dx) {
        const int x = cx + dx;
        const int y = cy + dy;
        if (!grid.in_bounds(x, y) || !(grid.at(x, y) > occ_l)) continue;
        const double ox = x + 0.5 - gx;
        const double oy = y + 0.5 - gy;
        const double sq = ox * ox + oy * oy;
        if (best_sq < 0.0 || sq < best_sq) best_sq = sq;
      }
    }
    if (best_sq >= 0.0) total += std::exp(-best_sq / 2.0);
  }
  return total;
}

// Greedy hill climb over (x, y, theta). Each pass keeps stepping to the best
// improving neighbour, then the steps are halved. The result never scores
// below the initial pose.
inline ScanMatchResult scan_match(const OccupancyGrid& grid, const Pose2D& initial,
                                  const LaserScan& scan, const ScanMatchOptions& opts = {}) {
  const auto endpoints = detail::scan_endpoints(scan);
  ScanMatchResult best{initial, 0.0};
  if (endpoints.empty() || grid.empty()) return best;
  best.score = scan_match_score(grid, initial, endpoints, opts.kernel_cells);
  if (best.score <= 0.0) return {initial, 0.0};

  double step_xy = opts.translation_cells * grid.resolution;
  double step_th = opts.rotation;
  for (int pass = 0; pass < opts.passes; ++pass) {
    for (int it = 0; it < opts.max_iterations_per_pass; ++it) {
      const std::array<Pose2D, 6> moves{
          Pose2D{best.pose.x + step_xy, best.pose.y, best.pose.theta},
          Pose2D{best.pose.x - step_xy, best.pose.y, best.pose.theta},
          Pose2D{best.pose.x, best.pose.y + step_xy, best.pose.theta},
          Pose2D{best.pose.x, best.pose.y - step_xy, best.pose.theta},
          Pose2D{best.pose.x, best.pose.y, best.pose.theta + step_th},
          Pose2D{best.pose.x, best.pose.y, best.pose.theta - step_th},
      };
      ScanMatchResult candidate = best;
      for (const auto& m : moves) {
        const double s = scan_match_score(grid, m, endpoints, opts.kernel_cells);
        if (s > candidate.score) candidate = {m, s};
      }
      if (candidate.score <= best.score) break;
      best = candidate;
    }
    step_xy /= 2.0;
    step_th /= 2.0;
  }
  return best;
}

}  // namespace minibot

#endif  // MINIBOT_MAPPING_HPP_
