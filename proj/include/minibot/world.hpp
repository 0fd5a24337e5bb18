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

#ifndef MINIBOT_WORLD_HPP_
#define MINIBOT_WORLD_HPP_

// Shared domain types for the simulator and navigation stack: planar poses,
// velocities, wheel speeds, robot geometry, laser scans and occupancy grids.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace minibot {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  if (!std::isfinite(a)) {
    throw std::invalid_argument("normalize_angle: non-finite angle");
  }
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

// Signed smallest difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b) { return normalize_angle(a - b); }

struct Pose2D {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad, kept in (-pi, pi]

  Pose2D() = default;
  Pose2D(double x_in, double y_in, double theta_in)
      : x(x_in), y(y_in), theta(normalize_angle(theta_in)) {
    if (!std::isfinite(x) || !std::isfinite(y)) {
      throw std::invalid_argument("Pose2D: non-finite position");
    }
  }

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

// Applies `delta`, expressed in the frame of `base`, on top of `base`.
inline Pose2D compose(const Pose2D& base, const Pose2D& delta) {
  const double c = std::cos(base.theta);
  const double s = std::sin(base.theta);
  return {base.x + c * delta.x - s * delta.y,
          base.y + s * delta.x + c * delta.y, base.theta + delta.theta};
}

// The pose of `to` expressed in the frame of `from`.
inline Pose2D relative(const Pose2D& from, const Pose2D& to) {
  const double c = std::cos(from.theta);
  const double s = std::sin(from.theta);
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  return {c * dx + s * dy, -s * dx + c * dy, to.theta - from.theta};
}

inline double planar_distance(const Pose2D& a, const Pose2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Body-frame velocity of a differential-drive base. There is no lateral
// component: the wheels cannot push the body sideways.
struct Twist2D {
  double v = 0.0;  // m/s, forward
  double w = 0.0;  // rad/s, counter-clockwise positive

  friend bool operator==(const Twist2D&, const Twist2D&) = default;
};

struct WheelSpeeds {
  double right = 0.0;  // rad/s
  double left = 0.0;   // rad/s

  friend bool operator==(const WheelSpeeds&, const WheelSpeeds&) = default;
};

// Beam i points at angle_min + i * increment(), with the bearing interval
// treated as half-open so a full revolution does not duplicate a beam.
struct ScanConfig {
  int beam_count = 360;
  double angle_min = -kPi;
  double angle_max = kPi;
  double range_min = 0.15;
  double range_max = 8.0;
  double noise_sigma = 0.01;

  double increment() const {
    return (angle_max - angle_min) / static_cast<double>(beam_count);
  }
  double bearing(int i) const { return angle_min + i * increment(); }

  void validate() const {
    if (beam_count < 1) throw std::invalid_argument("ScanConfig: beam_count < 1");
    if (!(range_min < range_max)) {
      throw std::invalid_argument("ScanConfig: range_min must be < range_max");
    }
    if (!(angle_min < angle_max)) {
      throw std::invalid_argument("ScanConfig: angle_min must be < angle_max");
    }
    if (!(range_min >= 0.0) || !(noise_sigma >= 0.0)) {
      throw std::invalid_argument("ScanConfig: negative range_min or noise");
    }
  }
};

struct RobotParams {
  double wheel_radius = 0.04;      // m, half the 0.08 m wheel diameter
  double wheel_separation = 0.1;   // m
  double max_wheel_speed = 30.0;   // rad/s
  double footprint_radius = 0.05;  // m, used for contact checks
  ScanConfig lidar{};

  void validate() const {
    if (!(wheel_radius > 0.0)) throw std::invalid_argument("RobotParams: wheel_radius <= 0");
    if (!(wheel_separation > 0.0)) {
      throw std::invalid_argument("RobotParams: wheel_separation <= 0");
    }
    if (!(max_wheel_speed > 0.0)) {
      throw std::invalid_argument("RobotParams: max_wheel_speed <= 0");
    }
    if (!(footprint_radius >= 0.0)) {
      throw std::invalid_argument("RobotParams: footprint_radius < 0");
    }
    lidar.validate();
  }
};

struct LaserScan {
  ScanConfig config{};
  std::vector<double> ranges;  // one per beam, metres
  double stamp = 0.0;          // s

  // A beam with no return reports exactly range_max.
  bool is_sentinel(std::size_t i) const { return ranges[i] >= config.range_max; }
};

// ---------------------------------------------------------------------------
// Occupancy grid

inline constexpr double kLogOddsMin = -6.0;
inline constexpr double kLogOddsMax = 6.0;
inline constexpr double kDefaultOccupiedThresh = 0.65;
inline constexpr double kDefaultFreeThresh = 0.196;

inline double log_odds(double p) { return std::log(p / (1.0 - p)); }
inline double probability_from_log_odds(double l) { return 1.0 / (1.0 + std::exp(-l)); }

enum class CellClass : std::uint8_t { kFree, kUnknown, kOccupied };

struct CellIndex {
  int x = 0;
  int y = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct OccupancyGrid {
  int width = 0;
  int height = 0;
  double resolution = 0.05;  // m/cell
  Pose2D origin{};           // world pose of the outer corner of cell (0, 0)
  std::vector<double> cells; // log-odds, row-major, row 0 at the lowest y
  double occupied_thresh = kDefaultOccupiedThresh;
  double free_thresh = kDefaultFreeThresh;

  OccupancyGrid() = default;
  OccupancyGrid(int w, int h, double res, Pose2D org = {})
      : width(w), height(h), resolution(res), origin(org),
        cells(static_cast<std::size_t>(w > 0 && h > 0 ? w : 0) *
                  static_cast<std::size_t>(w > 0 && h > 0 ? h : 0),
              0.0) {
    validate();
  }

  void validate() const {
    if (width < 0 || height < 0) throw std::invalid_argument("OccupancyGrid: negative size");
    if (!(resolution > 0.0)) throw std::invalid_argument("OccupancyGrid: resolution <= 0");
    if (cells.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("OccupancyGrid: cell count does not match width*height");
    }
    if (origin.theta != 0.0) {
      throw std::invalid_argument("OccupancyGrid: rotated origins are not supported");
    }
    if (!(free_thresh < occupied_thresh)) {
      throw std::invalid_argument("OccupancyGrid: free_thresh must be < occupied_thresh");
    }
  }

  bool empty() const { return cells.empty(); }
  std::size_t size() const { return cells.size(); }

  bool in_bounds(int cx, int cy) const {
    return cx >= 0 && cy >= 0 && cx < width && cy < height;
  }
  bool in_bounds(CellIndex c) const { return in_bounds(c.x, c.y); }

  std::size_t index(int cx, int cy) const {
    return static_cast<std::size_t>(cy) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(cx);
  }
  std::size_t index(CellIndex c) const { return index(c.x, c.y); }

  double& at(int cx, int cy) { return cells[index(cx, cy)]; }
  double at(int cx, int cy) const { return cells[index(cx, cy)]; }

  double probability(std::size_t i) const { return probability_from_log_odds(cells[i]); }

  CellClass classify(std::size_t i) const {
    const double p = probability(i);
    if (p > occupied_thresh) return CellClass::kOccupied;
    if (p < free_thresh) return CellClass::kFree;
    return CellClass::kUnknown;
  }
  CellClass classify(int cx, int cy) const { return classify(index(cx, cy)); }

  bool is_occupied(int cx, int cy) const { return classify(cx, cy) == CellClass::kOccupied; }

  void set_class(std::size_t i, CellClass c) {
    cells[i] = c == CellClass::kOccupied ? kLogOddsMax
               : c == CellClass::kFree   ? kLogOddsMin
                                         : 0.0;
  }
  void set_class(int cx, int cy, CellClass c) { set_class(index(cx, cy), c); }

  double width_m() const { return width * resolution; }
  double height_m() const { return height * resolution; }
};

// Cell containing world point (x, y), or nullopt outside the grid.
inline std::optional<CellIndex> world_to_cell(const OccupancyGrid& grid, double x, double y) {
  const double gx = (x - grid.origin.x) / grid.resolution;
  const double gy = (y - grid.origin.y) / grid.resolution;
  if (!(gx >= 0.0) || !(gy >= 0.0)) return std::nullopt;
  if (gx >= grid.width || gy >= grid.height) return std::nullopt;
  CellIndex c{static_cast<int>(std::floor(gx)), static_cast<int>(std::floor(gy))};
  if (!grid.in_bounds(c)) return std::nullopt;
  return c;
}

inline std::optional<CellIndex> world_to_cell(const OccupancyGrid& grid, const Pose2D& p) {
  return world_to_cell(grid, p.x, p.y);
}

struct Point2D {
  double x = 0.0;
  double y = 0.0;
};

inline Point2D cell_to_world(const OccupancyGrid& grid, CellIndex c) {
  return {grid.origin.x + (c.x + 0.5) * grid.resolution,
          grid.origin.y + (c.y + 0.5) * grid.resolution};
}

// ---------------------------------------------------------------------------
// Inertia

struct InertiaDiag {
  double ixx = 0.0;
  double iyy = 0.0;
  double izz = 0.0;
  friend bool operator==(const InertiaDiag&, const InertiaDiag&) = default;
};

// Solid cylinder about its centre, axis along z.
inline InertiaDiag cylinder_inertia(double m, double r, double h) {
  if (!(m >= 0.0) || !(r >= 0.0) || !(h >= 0.0)) {
    throw std::invalid_argument("cylinder_inertia: mass, radius and height must be >= 0");
  }
  const double side = m * (3.0 * r * r + h * h) / 12.0;
  return {side, side, m * r * r / 2.0};
}

}  // namespace minibot

#endif  // MINIBOT_WORLD_HPP_
