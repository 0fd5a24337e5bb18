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

#ifndef MINIBOT_LOCALIZATION_HPP_
#define MINIBOT_LOCALIZATION_HPP_

// Monte Carlo localisation on a static map: rotate-translate-rotate odometry
// motion model, likelihood-field sensor model and low-variance resampling,
// with filter updates gated on accumulated motion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "minibot/distance_field.hpp"
#include "minibot/simulator.hpp"
#include "minibot/world.hpp"

namespace minibot {

struct Particle {
  Pose2D pose{};
  double weight = 0.0;
};

struct ParticleSet {
  std::vector<Particle> particles;
  std::size_t count() const { return particles.size(); }
};

struct LikelihoodFieldParams {
  double z_hit = 0.95;
  double z_rand = 0.05;
  double sigma_hit = 0.1;          // m
  double max_obstacle_dist = 2.0;  // m
};

struct AmclConfig {
  int min_particles = 500;
  double update_min_d = 0.1;  // m
  double update_min_a = 0.2;  // rad
  // Odometry noise: rot<-rot, rot<-trans, trans<-trans, trans<-rot.
  // Sized against the simulator's odometry noise (yaw variance 0.01 per metre
  // needs roughly 0.05 on rot<-trans) with a 4x margin.
  std::array<double, 4> alphas{0.02, 0.2, 0.005, 0.02};
  LikelihoodFieldParams likelihood{};
  int beam_stride = 8;
  // Resample when the effective sample size drops below this fraction of N.
  double resample_neff_ratio = 0.5;

  void validate() const {
    if (min_particles < 1) throw std::invalid_argument("AmclConfig: min_particles < 1");
    if (!(update_min_d >= 0.0) || !(update_min_a >= 0.0)) {
      throw std::invalid_argument("AmclConfig: negative update threshold");
    }
    for (double a : alphas) {
      if (!(a >= 0.0)) throw std::invalid_argument("AmclConfig: negative odometry alpha");
    }
    if (std::abs(likelihood.z_hit + likelihood.z_rand - 1.0) > 1e-9) {
      throw std::invalid_argument("AmclConfig: z_hit + z_rand must equal 1");
    }
    if (!(likelihood.sigma_hit > 0.0) || !(likelihood.max_obstacle_dist > 0.0)) {
      throw std::invalid_argument("AmclConfig: sigma_hit and max_obstacle_dist must be > 0");
    }
    if (beam_stride < 1) throw std::invalid_argument("AmclConfig: beam_stride < 1");
    if (!(resample_neff_ratio >= 0.0 && resample_neff_ratio <= 1.0)) {
      throw std::invalid_argument("AmclConfig: resample_neff_ratio outside [0, 1]");
    }
  }
};

struct PoseStd {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Odometry increment decomposed as rotate, translate, rotate.
struct OdomDelta {
  double trans = 0.0;
  double rot1 = 0.0;
  double rot2 = 0.0;
};

inline OdomDelta odom_delta_between(const Pose2D& from, const Pose2D& to) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  OdomDelta d;
  d.trans = std::hypot(dx, dy);
  // Heading of a tiny translation is meaningless; attribute it all to rot2.
  d.rot1 = d.trans < 0.01 ? 0.0 : angle_diff(std::atan2(dy, dx), from.theta);
  d.rot2 = angle_diff(angle_diff(to.theta, from.theta), d.rot1);
  return d;
}

// True when the accumulated motion warrants a filter update.
inline bool should_update(double distance, double angle, const AmclConfig& cfg) {
  return distance >= cfg.update_min_d || angle >= cfg.update_min_a;
}

inline ParticleSet init_gaussian(const OccupancyGrid& map, const Pose2D& mean, const PoseStd& std_dev,
                                 const AmclConfig& cfg, Rng& rng) {
  cfg.validate();
  if (map.empty()) throw std::invalid_argument("init_gaussian: empty map");
  if (!world_to_cell(map, mean)) throw std::out_of_range("init_gaussian: mean outside the map");
  constexpr int kRetries = 20;
  const double occ_l = log_odds(map.occupied_thresh);
  std::normal_distribution<double> n01(0.0, 1.0);
  ParticleSet ps;
  ps.particles.reserve(static_cast<std::size_t>(cfg.min_particles));
  const double w = 1.0 / cfg.min_particles;
  for (int i = 0; i < cfg.min_particles; ++i) {
    Pose2D p;
    for (int attempt = 0; attempt <= kRetries; ++attempt) {
      p = Pose2D{mean.x + std_dev.x * n01(rng), mean.y + std_dev.y * n01(rng),
                 mean.theta + std_dev.theta * n01(rng)};
      const auto c = world_to_cell(map, p);
      if (c && !(map.cells[map.index(*c)] > occ_l)) break;
    }
    ps.particles.push_back({p, w});
  }
  return ps;
}

// Samples each particle forward through the noisy odometry increment.
inline void motion_update(ParticleSet& ps, const OdomDelta& delta, const AmclConfig& cfg,
                          Rng& rng) {
  const auto& a = cfg.alphas;
  // A reversing robot reports rot1 near pi; measure its noise from the
  // nearer of the forward and backward directions.
  const double rot1_n = std::min(std::abs(angle_diff(delta.rot1, 0.0)),
                                 std::abs(angle_diff(delta.rot1, kPi)));
  const double rot2_n = std::min(std::abs(angle_diff(delta.rot2, 0.0)),
                                 std::abs(angle_diff(delta.rot2, kPi)));
  const double t2 = delta.trans * delta.trans;
  const double sd_rot1 = std::sqrt(a[0] * rot1_n * rot1_n + a[1] * t2);
  const double sd_trans = std::sqrt(a[2] * t2 + a[3] * (rot1_n * rot1_n + rot2_n * rot2_n));
  const double sd_rot2 = std::sqrt(a[0] * rot2_n * rot2_n + a[1] * t2);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (auto& p : ps.particles) {
    const double rot1 = delta.rot1 - (sd_rot1 > 0.0 ? sd_rot1 * n01(rng) : 0.0);
    const double trans = delta.trans - (sd_trans > 0.0 ? sd_trans * n01(rng) : 0.0);
    const double rot2 = delta.rot2 - (sd_rot2 > 0.0 ? sd_rot2 * n01(rng) : 0.0);
    const double heading = p.pose.theta + rot1;
    p.pose = Pose2D{p.pose.x + trans * std::cos(heading), p.pose.y + trans * std::sin(heading),
                    heading + rot2};
  }
}

// Likelihood-field reweighting. Returns true when every weight vanished and
// the set was reset to uniform weights.
inline bool sensor_update(ParticleSet& ps, const LaserScan& scan, const DistanceField& field,
                          const AmclConfig& cfg) {
  if (ps.particles.empty()) return false;
  const auto& lf = cfg.likelihood;
  const double range_max = scan.config.range_max;
  const double norm = 1.0 / (lf.sigma_hit * std::sqrt(kTwoPi));
  const double inv_two_var = 1.0 / (2.0 * lf.sigma_hit * lf.sigma_hit);
  const double rand_term = lf.z_rand / range_max;

  struct Beam {
    double range;
    double bearing;
  };
  std::vector<Beam> beams;
  for (std::size_t i = 0; i < scan.ranges.size(); i += static_cast<std::size_t>(cfg.beam_stride)) {
    if (scan.is_sentinel(i) || scan.ranges[i] < scan.config.range_min) continue;
    beams.push_back({scan.ranges[i], scan.config.bearing(static_cast<int>(i))});
  }

  // Log domain keeps products of many small densities representable.
  std::vector<double> log_w(ps.particles.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ps.particles.size(); ++k) {
    const Particle& p = ps.particles[k];
    double lw = p.weight > 0.0 ? std::log(p.weight) : -std::numeric_limits<double>::infinity();
    for (const Beam& b : beams) {
      const double a = p.pose.theta + b.bearing;
      const double d = field.at_world(p.pose.x + b.range * std::cos(a),
                                      p.pose.y + b.range * std::sin(a));
      lw += std::log(lf.z_hit * norm * std::exp(-d * d * inv_two_var) + rand_term);
    }
    log_w[k] = lw;
    best = std::max(best, lw);
  }

  double sum = 0.0;
  if (std::isfinite(best)) {
    for (std::size_t k = 0; k < ps.particles.size(); ++k) {
      const double w = std::exp(log_w[k] - best);
      ps.particles[k].weight = w;
      sum += w;
    }
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    const double u = 1.0 / static_cast<double>(ps.particles.size());
    for (auto& p : ps.particles) p.weight = u;
    return true;
  }
  for (auto& p : ps.particles) p.weight /= sum;
  return false;
}

// 1 / sum(w^2) for normalized weights.
inline double effective_sample_size(const ParticleSet& ps) {
  double s2 = 0.0;
  for (const auto& p : ps.particles) s2 += p.weight * p.weight;
  return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

// Systematic resampling: one uniform offset, N evenly spaced pointers.
inline void resample(ParticleSet& ps, Rng& rng) {
  const std::size_t n = ps.particles.size();
  if (n == 0) return;
  double total = 0.0;
  for (const auto& p : ps.particles) total += p.weight;
  if (!(total > 0.0)) throw std::invalid_argument("resample: all weights are zero");

  const double step = total / static_cast<double>(n);
  std::uniform_real_distribution<double> u(0.0, step);
  double pointer = u(rng);
  std::vector<Particle> out;
  out.reserve(n);
  std::size_t i = 0;
  double cumulative = ps.particles[0].weight;
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < n; ++m) {
    while (pointer > cumulative && i + 1 < n) cumulative += ps.particles[++i].weight;
    out.push_back({ps.particles[i].pose, w});
    pointer += step;
  }
  ps.particles = std::move(out);
}

struct PoseEstimate {
  Pose2D pose{};
  double var_x = 0.0;
  double var_y = 0.0;
  double cov_xy = 0.0;
  double circular_var = 0.0;  // 1 - mean resultant length, in [0, 1]
};

inline PoseEstimate estimate_pose(const ParticleSet& ps) {
  PoseEstimate est;
  double sw = 0.0, mx = 0.0, my = 0.0, sc = 0.0, ss = 0.0;
  for (const auto& p : ps.particles) {
    sw += p.weight;
    mx += p.weight * p.pose.x;
    my += p.weight * p.pose.y;
    sc += p.weight * std::cos(p.pose.theta);
    ss += p.weight * std::sin(p.pose.theta);
  }
  if (!(sw > 0.0)) return est;
  mx /= sw;
  my /= sw;
  double vx = 0.0, vy = 0.0, cxy = 0.0;
  for (const auto& p : ps.particles) {
    const double dx = p.pose.x - mx;
    const double dy = p.pose.y - my;
    vx += p.weight * dx * dx;
    vy += p.weight * dy * dy;
    cxy += p.weight * dx * dy;
  }
  est.pose = Pose2D{mx, my, std::atan2(ss, sc)};
  est.var_x = vx / sw;
  est.var_y = vy / sw;
  est.cov_xy = cxy / sw;
  est.circular_var = std::clamp(1.0 - std::hypot(sc, ss) / sw, 0.0, 1.0);
  return est;
}

// Stateful filter: tracks the odometry pose of the last update and runs the
// motion / sensor / resample cycle once enough motion has accumulated.
class Amcl {
 public:
  Amcl(std::shared_ptr<const OccupancyGrid> map, AmclConfig cfg, std::uint64_t seed)
      : map_(std::move(map)), cfg_(cfg), rng_(seed) {
    if (!map_) throw std::invalid_argument("Amcl: null map");
    cfg_.validate();
    field_ = precompute_distance_field(*map_, cfg_.likelihood.max_obstacle_dist);
  }
  Amcl(const OccupancyGrid& map, AmclConfig cfg, std::uint64_t seed)
      : Amcl(std::make_shared<const OccupancyGrid>(map), cfg, seed) {}

  void initialize(const Pose2D& mean, const PoseStd& std_dev, const Pose2D& odom) {
    particles_ = init_gaussian(*map_, mean, std_dev, cfg_, rng_);
    last_odom_ = odom;
    initialized_ = true;
    force_update_ = true;
    updates_ = 0;
    resamples_ = 0;
  }

  // Returns true when a filter update ran.
  bool process(const Pose2D& odom, const LaserScan& scan) {
    if (!initialized_) return false;
    const double moved = planar_distance(odom, last_odom_);
    const double turned = std::abs(angle_diff(odom.theta, last_odom_.theta));
    if (!force_update_ && !should_update(moved, turned, cfg_)) return false;
    motion_update(particles_, odom_delta_between(last_odom_, odom), cfg_, rng_);
    last_odom_ = odom;
    force_update_ = false;
    diverged_ = sensor_update(particles_, scan, field_, cfg_);
    ++updates_;
    if (effective_sample_size(particles_) < cfg_.resample_neff_ratio * particles_.count()) {
      resample(particles_, rng_);
      ++resamples_;
    }
    return true;
  }

  PoseEstimate estimate() const { return estimate_pose(particles_); }
  // The filter estimate carried forward by the odometry seen since the last
  // filter update, so the pose does not lag between updates.
  Pose2D pose_at(const Pose2D& odom) const {
    return compose(estimate().pose, relative(last_odom_, odom));
  }
  const ParticleSet& particles() const { return particles_; }
  const AmclConfig& config() const { return cfg_; }
  const DistanceField& field() const { return field_; }
  int updates() const { return updates_; }
  int resamples() const { return resamples_; }
  bool diverged() const { return diverged_; }
  bool initialized() const { return initialized_; }

 private:
  std::shared_ptr<const OccupancyGrid> map_;
  AmclConfig cfg_;
  Rng rng_;
  DistanceField field_;
  ParticleSet particles_;
  Pose2D last_odom_{};
  bool initialized_ = false;
  bool force_update_ = false;
  bool diverged_ = false;
  int updates_ = 0;
  int resamples_ = 0;
};

}  // namespace minibot

#endif  // MINIBOT_LOCALIZATION_HPP_
