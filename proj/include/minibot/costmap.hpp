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

#ifndef MINIBOT_COSTMAP_HPP_
#define MINIBOT_COSTMAP_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "minibot/distance_field.hpp"
#include "minibot/world.hpp"

namespace minibot {

inline constexpr std::uint8_t kCostFree = 0;
inline constexpr std::uint8_t kCostInscribed = 253;
inline constexpr std::uint8_t kCostLethal = 254;
inline constexpr std::uint8_t kCostUnknown = 255;

struct InflationParams {
  double robot_radius = 0.06;      // m
  double inflation_radius = 0.25;  // m
  double decay = 10.0;             // 1/m
};

struct Costmap {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Pose2D origin{};
  std::vector<std::uint8_t> cost;

  bool in_bounds(int cx, int cy) const { return cx >= 0 && cy >= 0 && cx < width && cy < height; }
  std::size_t index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(cx);
  }
  std::uint8_t at(int cx, int cy) const { return cost[index(cx, cy)]; }

  std::optional<CellIndex> cell_of(double x, double y) const {
    const double gx = (x - origin.x) / resolution;
    const double gy = (y - origin.y) / resolution;
    if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= width || gy >= height) return std::nullopt;
    return CellIndex{static_cast<int>(gx), static_cast<int>(gy)};
  }

  // Off-map points are treated as lethal.
  std::uint8_t at_world(double x, double y) const {
    const auto c = cell_of(x, y);
    return c ? at(c->x, c->y) : kCostLethal;
  }

  Point2D center(CellIndex c) const {
    return {origin.x + (c.x + 0.5) * resolution, origin.y + (c.y + 0.5) * resolution};
  }
};

// Cost for a cell at `d` metres from the nearest obstacle.
inline std::uint8_t inflation_cost(double d, const InflationParams& p) {
  if (d <= 0.0) return kCostLethal;
  // Distances come from float storage; do not let rounding push a cell that
  // sits exactly on the radius out of the inscribed band.
  if (d <= p.robot_radius + 1e-6) return kCostInscribed;
  if (d >= p.inflation_radius) return kCostFree;
  const double c = (kCostInscribed - 1) * std::exp(-p.decay * (d - p.robot_radius));
  return static_cast<std::uint8_t>(c);
}

inline Costmap inflate(const OccupancyGrid& grid, const InflationParams& p = {}) {
  if (!(p.robot_radius >= 0.0) || !(p.inflation_radius >= p.robot_radius)) {
    throw std::invalid_argument("inflate: need 0 <= robot_radius <= inflation_radius");
  }
  Costmap cm;
  cm.width = grid.width;
  cm.height = grid.height;
  cm.resolution = grid.resolution;
  cm.origin = grid.origin;
  cm.cost.assign(grid.size(), kCostFree);
  // Capped at no less than one cell so that a zero inflation radius cannot
  // clamp a free cell's distance to zero.
  const DistanceField field =
      precompute_distance_field(grid, std::max(p.inflation_radius, grid.resolution));
  const double occ_l = log_odds(grid.occupied_thresh);
  const double free_l = log_odds(grid.free_thresh);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double l = grid.cells[i];
    if (l > occ_l) {
      cm.cost[i] = kCostLethal;
    } else if (!(l < free_l)) {
      cm.cost[i] = kCostUnknown;
    } else {
      cm.cost[i] = inflation_cost(field.distance[i], p);
    }
  }
  return cm;
}

}  // namespace minibot

#endif  // MINIBOT_COSTMAP_HPP_
