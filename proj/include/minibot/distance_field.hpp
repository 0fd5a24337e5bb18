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

#ifndef MINIBOT_DISTANCE_FIELD_HPP_
#define MINIBOT_DISTANCE_FIELD_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "minibot/world.hpp"

namespace minibot {

// Per-cell Euclidean distance (cell centre to cell centre, metres) to the
// nearest occupied cell, capped at `cap`.
struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = 0.05;
  Pose2D origin{};
  double cap = 0.0;
  std::vector<float> distance;

  double at(int cx, int cy) const {
    return distance[static_cast<std::size_t>(cy) * static_cast<std::size_t>(width) +
                    static_cast<std::size_t>(cx)];
  }

  // Points outside the grid are reported at the cap.
  double at_world(double x, double y) const {
    const double gx = (x - origin.x) / resolution;
    const double gy = (y - origin.y) / resolution;
    if (!(gx >= 0.0) || !(gy >= 0.0) || gx >= width || gy >= height) return cap;
    return at(static_cast<int>(gx), static_cast<int>(gy));
  }
};

namespace detail {

// Exact 1-D squared distance transform of a sampled function (lower envelope
// of parabolas). `f` is read, `d` written; `v` and `z` are scratch.
inline void squared_distance_1d(const std::vector<double>& f, std::vector<double>& d,
                                std::vector<int>& v, std::vector<double>& z, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (f[v[0]] == kInf) {
      v[0] = q;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (f[v[0]] == kInf) {
    std::fill(d.begin(), d.begin() + n, kInf);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace detail

// Two-pass exact Euclidean distance transform over the cells classified as
// occupied. A grid with no occupied cells yields the cap everywhere.
inline DistanceField precompute_distance_field(const OccupancyGrid& grid, double cap) {
  DistanceField out;
  out.width = grid.width;
  out.height = grid.height;
  out.resolution = grid.resolution;
  out.origin = grid.origin;
  out.cap = cap;
  const std::size_t n = grid.size();
  out.distance.assign(n, static_cast<float>(cap));
  if (n == 0) return out;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double occ_l = log_odds(grid.occupied_thresh);
  std::vector<double> sq(n, kInf);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.cells[i] > occ_l) {
      sq[i] = 0.0;
      any = true;
    }
  }
  if (!any) return out;

  const int w = grid.width;
  const int h = grid.height;
  const int longest = std::max(w, h);
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<int> v(longest);

  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = sq[static_cast<std::size_t>(y) * w + x];
    detail::squared_distance_1d(f, d, v, z, h);
    for (int y = 0; y < h; ++y) sq[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) f[x] = sq[row + x];
    detail::squared_distance_1d(f, d, v, z, w);
    for (int x = 0; x < w; ++x) {
      const double dist = std::sqrt(d[x]) * grid.resolution;
      out.distance[row + x] = static_cast<float>(std::min(dist, cap));
    }
  }
  return out;
}

}  // namespace minibot

#endif  // MINIBOT_DISTANCE_FIELD_HPP_
