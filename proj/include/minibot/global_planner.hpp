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

#ifndef MINIBOT_GLOBAL_PLANNER_HPP_
#define MINIBOT_GLOBAL_PLANNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "minibot/costmap.hpp"
#include "minibot/world.hpp"

namespace minibot {

using Path = std::vector<Pose2D>;

// Exact path cost. Every move into a cell of cost c contributes (64 + c)
// units, to `straight` for axis moves and to `diagonal` for diagonal ones;
// in metres the cost is (straight + sqrt(2) * diagonal) * resolution / 64,
// i.e. step length * (1 + c / 64).
struct PathCost {
  std::int64_t straight = 0;
  std::int64_t diagonal = 0;

  double units() const { return static_cast<double>(straight) + std::sqrt(2.0) * diagonal; }
  double meters(double resolution) const { return units() * resolution / 64.0; }
  friend bool operator==(const PathCost&, const PathCost&) = default;
};

inline bool traversable(std::uint8_t cost) { return cost < kCostInscribed || cost == kCostUnknown; }
inline std::int64_t step_units(std::uint8_t cost) { return 64 + static_cast<std::int64_t>(cost); }

struct GlobalPlan {
  bool ok = false;
  Path path;
  std::vector<CellIndex> cells;
  PathCost cost{};
  std::string reason;
};

// 8-connected A* with a Euclidean heuristic, which never overestimates since
// every step costs at least its length.
inline GlobalPlan plan_global(const Costmap& cm, const Pose2D& start, const Pose2D& goal) {
  GlobalPlan out;
  const auto s = cm.cell_of(start.x, start.y);
  if (!s) {
    out.reason = "start outside the map";
    return out;
  }
  const auto g = cm.cell_of(goal.x, goal.y);
  if (!g) {
    out.reason = "goal outside the map";
    return out;
  }
  if (!traversable(cm.at(g->x, g->y))) {
    out.reason = "goal lies in a lethal cell";
    return out;
  }
  if (*s == *g) {
    out.ok = true;
    out.path = {start};
    out.cells = {*s};
    return out;
  }

  const std::size_t n = cm.cost.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double sqrt2 = std::sqrt(2.0);
  std::vector<double> g_units(n, kInf);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);

  auto heuristic = [&](int x, int y) {
    return 64.0 * std::hypot(static_cast<double>(x - g->x), static_cast<double>(y - g->y));
  };
  using Entry = std::pair<double, std::int64_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const std::size_t start_i = cm.index(s->x, s->y);
  const std::size_t goal_i = cm.index(g->x, g->y);
  g_units[start_i] = 0.0;
  open.emplace(heuristic(s->x, s->y), static_cast<std::int64_t>(start_i));

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  bool found = false;
  while (!open.empty()) {
    const std::size_t cur = static_cast<std::size_t>(open.top().second);
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == goal_i) {
      found = true;
      break;
    }
    const int cx = static_cast<int>(cur % cm.width);
    const int cy = static_cast<int>(cur / cm.width);
    for (int k = 0; k < 8; ++k) {
      const int nx = cx + kDx[k];
      const int ny = cy + kDy[k];
      if (!cm.in_bounds(nx, ny)) continue;
      const std::size_t ni = cm.index(nx, ny);
      if (closed[ni]) continue;
      const std::uint8_t c = cm.cost[ni];
      if (!traversable(c)) continue;
      const double step = static_cast<double>(step_units(c)) * (k < 4 ? 1.0 : sqrt2);
      const double cand = g_units[cur] + step;
      if (cand < g_units[ni]) {
        g_units[ni] = cand;
        parent[ni] = static_cast<std::int64_t>(cur);
        open.emplace(cand + heuristic(nx, ny), static_cast<std::int64_t>(ni));
      }
    }
  }
  if (!found) {
    out.reason = "goal unreachable";
    return out;
  }

  for (std::int64_t i = static_cast<std::int64_t>(goal_i); i >= 0; i = parent[i]) {
    out.cells.push_back(
        {static_cast<int>(i % cm.width), static_cast<int>(i / cm.width)});
  }
  std::reverse(out.cells.begin(), out.cells.end());
  for (std::size_t k = 1; k < out.cells.size(); ++k) {
    const CellIndex a = out.cells[k - 1];
    const CellIndex b = out.cells[k];
    const std::int64_t u = step_units(cm.at(b.x, b.y));
    if (a.x != b.x && a.y != b.y) {
      out.cost.diagonal += u;
    } else {
      out.cost.straight += u;
    }
  }

  out.path.reserve(out.cells.size());
  out.path.push_back(start);
  for (std::size_t k = 1; k + 1 < out.cells.size(); ++k) {
    const Point2D p = cm.center(out.cells[k]);
    const Point2D q = cm.center(out.cells[k + 1]);
    out.path.push_back(Pose2D{p.x, p.y, std::atan2(q.y - p.y, q.x - p.x)});
  }
  out.path.push_back(goal);
  out.ok = true;
  return out;
}

}  // namespace minibot

#endif  // MINIBOT_GLOBAL_PLANNER_HPP_
