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

#ifndef MINIBOT_GRID_TRAVERSAL_HPP_
#define MINIBOT_GRID_TRAVERSAL_HPP_

#include <cmath>
#include <limits>

#include "minibot/world.hpp"

namespace minibot {

// Walks every cell a ray crosses, in order, using the Amanatides-Woo
// incremental traversal. The visitor is called as
//   bool visit(CellIndex cell, double t_enter, double t_exit)
// with distances in metres along the ray; returning false stops the walk.
// The walk ends when the ray leaves the grid or reaches `t_max`. Rays whose
// origin lies outside the grid visit nothing.
template <typename Visitor>
void traverse_ray(const OccupancyGrid& grid, double x0, double y0, double angle, double t_max,
                  Visitor&& visit) {
  const auto start = world_to_cell(grid, x0, y0);
  if (!start || !(t_max > 0.0)) return;

  const double res = grid.resolution;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  const double gx = (x0 - grid.origin.x) / res;
  const double gy = (y0 - grid.origin.y) / res;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  int cx = start->x;
  int cy = start->y;
  const int step_x = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_y = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  const double delta_x = step_x != 0 ? res / std::abs(dx) : kInf;
  const double delta_y = step_y != 0 ? res / std::abs(dy) : kInf;
  double next_x = step_x > 0   ? (cx + 1 - gx) * res / dx
                  : step_x < 0 ? (gx - cx) * res / -dx
                               : kInf;
  double next_y = step_y > 0   ? (cy + 1 - gy) * res / dy
                  : step_y < 0 ? (gy - cy) * res / -dy
                               : kInf;

  double t_enter = 0.0;
  while (true) {
    const double t_exit = std::min({next_x, next_y, t_max});
    if (!visit(CellIndex{cx, cy}, t_enter, t_exit)) return;
    if (t_exit >= t_max) return;
    if (next_x < next_y) {
      cx += step_x;
      next_x += delta_x;
    } else {
      cy += step_y;
      next_y += delta_y;
    }
    t_enter = t_exit;
    if (!grid.in_bounds(cx, cy)) return;
  }
}

}  // namespace minibot

#endif  // MINIBOT_GRID_TRAVERSAL_HPP_
