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

#ifndef MINIBOT_DEMO_WORLD_HPP_
#define MINIBOT_DEMO_WORLD_HPP_

// The built-in world: a 10 m x 10 m walled room split by an interior wall
// with a single doorway, plus a few boxes so the scan has features to lock
// on to. The benchmark course starts in the west half and ends in the east
// half, so every route passes the doorway.

#include <cmath>
#include <stdexcept>
#include <string>

#include "minibot/world.hpp"

namespace minibot {

struct Box {
  double x_min, y_min, x_max, y_max;
};

inline void fill_box(OccupancyGrid& g, const Box& b, CellClass c = CellClass::kOccupied) {
  for (int cy = 0; cy < g.height; ++cy) {
    const double y = g.origin.y + (cy + 0.5) * g.resolution;
    if (y < b.y_min || y > b.y_max) continue;
    for (int cx = 0; cx < g.width; ++cx) {
      const double x = g.origin.x + (cx + 0.5) * g.resolution;
      if (x < b.x_min || x > b.x_max) continue;
      g.set_class(cx, cy, c);
    }
  }
}

struct DemoWorldLayout {
  double size = 10.0;
  double wall = 0.1;
  double door_y_min = 1.0;
  double door_y_max = 1.8;
};

inline OccupancyGrid make_demo_world(double resolution = 0.01, const DemoWorldLayout& l = {}) {
  const double half = l.size / 2.0;
  const int cells = static_cast<int>(std::lround(l.size / resolution));
  OccupancyGrid g(cells, cells, resolution, Pose2D{-half, -half, 0.0});
  fill_box(g, {-half, -half, half, half}, CellClass::kFree);
  // Outer walls.
  fill_box(g, {-half, -half, half, -half + l.wall});
  fill_box(g, {-half, half - l.wall, half, half});
  fill_box(g, {-half, -half, -half + l.wall, half});
  fill_box(g, {half - l.wall, -half, half, half});
  // Interior wall along x = 0 with a doorway.
  fill_box(g, {-l.wall / 2, -half, l.wall / 2, l.door_y_min});
  fill_box(g, {-l.wall / 2, l.door_y_max, l.wall / 2, half});
  // Furniture.
  fill_box(g, {-3.3, 2.2, -2.7, 2.8});
  fill_box(g, {-4.9, -0.6, -4.3, 0.2});
  fill_box(g, {-1.6, -4.9, -0.9, -4.5});
  fill_box(g, {2.8, 2.5, 3.3, 3.5});
  fill_box(g, {2.3, -2.2, 2.7, -1.8});
  fill_box(g, {4.3, -1.0, 4.9, -0.2});
  return g;
}

struct Course {
  std::string id;
  Pose2D start;
  Pose2D goal;
};

inline Course demo_course(const std::string& id = "doorway") {
  if (id == "doorway") return {id, Pose2D{-3.5, -3.5, 0.0}, Pose2D{3.5, -3.5, 0.0}};
  throw std::invalid_argument("unknown course id '" + id + "'");
}

// Start pose and command for the closed localisation loop in the west room:
// a circle of radius 1 m driven at 0.2 m/s.
inline Pose2D demo_loop_start() { return Pose2D{-2.0, -2.5, 0.0}; }
inline Twist2D demo_loop_command() { return {0.2, 0.2}; }

}  // namespace minibot

#endif  // MINIBOT_DEMO_WORLD_HPP_
