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

#ifndef MINIBOT_STACK_HPP_
#define MINIBOT_STACK_HPP_

// The whole robot in one object: simulator, mapping or localization, the
// navigator and the teleop state, driven one tick at a time. Commands from
// any thread go through submit(), which validates them, answers with an ack
// and queues them for the next tick.

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "minibot/config.hpp"
#include "minibot/costmap.hpp"
#include "minibot/goals.hpp"
#include "minibot/localization.hpp"
#include "minibot/mapping.hpp"
#include "minibot/navigator.hpp"
#include "minibot/simulator.hpp"
#include "minibot/teleop.hpp"

namespace minibot {

enum class StackMode { kMapping, kNavigation };

inline std::string_view to_string(StackMode m) {
  return m == StackMode::kMapping ? "mapping" : "navigation";
}

struct TeleopKeyCommand {
  char key;
};
struct TwistCommand {
  Twist2D twist;
};
struct GoalCommand {
  NavGoal goal;
  GoalHandle handle = 0;  // filled in by submit()
};
struct CancelCommand {
  GoalHandle handle;
};
struct ParamCommand {
  std::string key;
  std::string value;
};
using StackCommand =
    std::variant<TeleopKeyCommand, TwistCommand, GoalCommand, CancelCommand, ParamCommand>;

struct Ack {
  bool accepted = false;
  std::string reason;
  std::optional<GoalHandle> handle;
};

// Immutable view of the stack after a tick.
struct Snapshot {
  std::uint64_t seq = 0;
  double sim_time = 0.0;
  StackMode mode = StackMode::kMapping;
  Pose2D true_pose{};
  Pose2D estimated_pose{};
  std::vector<Pose2D> particles;  // at most kMaxSnapshotParticles
  LaserScan scan;
  std::uint64_t map_version = 0;
  std::shared_ptr<const OccupancyGrid> map;
  Path global_path;
  std::optional<GoalStatus> goal_status;
  bool collision = false;
  Twist2D command{};
};

inline constexpr std::size_t kMaxSnapshotParticles = 200;

// Uniform stride down to at most `limit` poses.
inline std::vector<Pose2D> downsample_particles(const ParticleSet& ps, std::size_t limit) {
  std::vector<Pose2D> out;
  if (ps.particles.empty() || limit == 0) return out;
  const std::size_t n = ps.particles.size();
  const std::size_t stride = (n + limit - 1) / limit;
  for (std::size_t i = 0; i < n; i += stride) out.push_back(ps.particles[i].pose);
  return out;
}

class Stack {
 public:
  // Without a static map the stack builds one (mapping mode); with one it
  // localizes against it and accepts goals (navigation mode).
  Stack(OccupancyGrid truth, Pose2D start, std::uint64_t seed, StackOptions opts = {},
        std::optional<OccupancyGrid> static_map = std::nullopt)
      : opts_((opts.validate(), opts)),
        sim_(std::move(truth), start, seed, opts.sim),
        mode_(static_map ? StackMode::kNavigation : StackMode::kMapping),
        pending_opts_(opts_) {
    const double dt = sim_.dt();
    if (mode_ == StackMode::kNavigation) {
      static_map->validate();
      map_ = std::make_shared<OccupancyGrid>(std::move(*static_map));
      published_map_ = map_;
      map_version_ = 1;
      costmap_ = std::make_shared<const Costmap>(inflate(*map_, opts_.inflation));
      amcl_.emplace(std::shared_ptr<const OccupancyGrid>(map_), opts_.amcl, seed + 1);
      amcl_->initialize(start, opts_.initial_std, sim_.state().odom_pose);
      navigator_.emplace(costmap_, opts_.planner, dt);
    } else {
      const OccupancyGrid& t = sim_.truth();
      map_ = std::make_shared<OccupancyGrid>(t.width, t.height, t.resolution, t.origin);
      map_pose_ = start;
    }
    last_odom_ = sim_.state().odom_pose;
    scan_ = sim_.scan();
    update_estimate(true);
  }

  StackMode mode() const { return mode_; }
  const Simulator& sim() const { return sim_; }
  const StackOptions& options() const { return opts_; }
  const OccupancyGrid& map() const { return *map_; }
  const std::optional<Amcl>& amcl() const { return amcl_; }
  const std::optional<Navigator>& navigator() const { return navigator_; }
  const TeleopState& teleop() const { return teleop_; }
  Pose2D estimated_pose() const { return estimate_; }
  std::uint64_t map_version() const { return map_version_; }
  std::uint64_t ticks() const { return ticks_; }

  // Thread-safe. Validates, assigns goal handles and queues the command.
  Ack submit(StackCommand cmd) {
    std::lock_guard<std::mutex> lock(mu_);
    Ack ack;
    if (auto* k = std::get_if<TeleopKeyCommand>(&cmd)) {
      if (find_binding(k->key) == nullptr) return reject("unmapped teleop key");
    } else if (auto* g = std::get_if<GoalCommand>(&cmd)) {
      if (mode_ != StackMode::kNavigation) return reject("goals need a static map (navigation mode)");
      if (!(g->goal.quat_w >= -1.0 && g->goal.quat_w <= 1.0)) return reject("quat_w must lie in [-1, 1]");
      if (!std::isfinite(g->goal.x) || !std::isfinite(g->goal.y)) return reject("non-finite goal");
      g->handle = next_handle_++;
      issued_.insert(g->handle);
      ack.handle = g->handle;
    } else if (auto* c = std::get_if<CancelCommand>(&cmd)) {
      if (!issued_.count(c->handle)) return reject("unknown goal handle " + std::to_string(c->handle));
      ack.handle = c->handle;
    } else if (auto* p = std::get_if<ParamCommand>(&cmd)) {
      const OptionSpec* spec = find_option(p->key);
      if (spec == nullptr) return reject("unknown parameter '" + p->key + "'");
      if (!spec->runtime) return reject(p->key + " can only be set at start-up");
      try {
        set_option(pending_opts_, p->key, p->value);
      } catch (const ConfigError& e) {
        return reject(e.what());
      }
    } else if (auto* t = std::get_if<TwistCommand>(&cmd)) {
      if (!std::isfinite(t->twist.v) || !std::isfinite(t->twist.w)) return reject("non-finite twist");
    }
    queue_.push_back(std::move(cmd));
    ack.accepted = true;
    return ack;
  }

  // One control period: apply queued commands, command the robot, sense,
  // then update the map or the pose estimate.
  void step() {
    std::deque<StackCommand> cmds;
    {
      std::lock_guard<std::mutex> lock(mu_);
      cmds.swap(queue_);
    }
    for (auto& c : cmds) apply(c);

    const double dt = sim_.dt();
    Twist2D cmd = teleop_twist_;
    if (navigator_ && goal_in_flight()) {
      cmd = navigator_->tick(estimate_, sim_.state().collided, dt).twist;
      if (sim_.state().collided && !goal_in_flight()) sim_.clear_collision();
    }
    last_command_ = cmd;
    sim_.tick(cmd);
    scan_ = sim_.scan();
    ++ticks_;
    update_estimate(false);
  }

  Snapshot snapshot() {
    Snapshot s;
    s.seq = ++snapshot_seq_;
    s.sim_time = sim_.state().time;
    s.mode = mode_;
    s.true_pose = sim_.state().true_pose;
    s.estimated_pose = estimate_;
    if (amcl_) s.particles = downsample_particles(amcl_->particles(), kMaxSnapshotParticles);
    s.scan = scan_;
    s.map_version = map_version_;
    s.map = published_map_;
    if (navigator_) {
      s.global_path = navigator_->path();
      if (const GoalStatus* g = navigator_->goals().current()) s.goal_status = *g;
    }
    s.collision = sim_.state().collided;
    s.command = last_command_;
    return s;
  }

  std::optional<GoalStatus> goal_status(GoalHandle h) const {
    if (!navigator_ || !navigator_->goals().contains(h)) return std::nullopt;
    return navigator_->goals().status(h);
  }

 private:
  static Ack reject(std::string reason) { return Ack{false, std::move(reason), std::nullopt}; }

  bool goal_in_flight() const {
    const GoalStatus* g = navigator_->goals().current();
    return g != nullptr && !is_terminal(g->state);
  }

  void apply(StackCommand& c) {
    if (auto* k = std::get_if<TeleopKeyCommand>(&c)) {
      if (auto t = teleop_key(teleop_, k->key)) take_manual_control(*t);
    } else if (auto* t = std::get_if<TwistCommand>(&c)) {
      take_manual_control(t->twist);
    } else if (auto* g = std::get_if<GoalCommand>(&c)) {
      sim_.clear_collision();
      teleop_twist_ = {};
      teleop_.linear_sign = teleop_.angular_sign = 0;
      navigator_->send_goal(g->goal, estimate_, g->handle);
    } else if (auto* x = std::get_if<CancelCommand>(&c)) {
      if (navigator_->goals().contains(x->handle)) navigator_->cancel_goal(x->handle);
    } else if (auto* p = std::get_if<ParamCommand>(&c)) {
      set_option(opts_, p->key, p->value);
      if (navigator_) navigator_->set_config(opts_.planner);
    }
  }

  // Manual driving overrides whatever goal is in flight.
  void take_manual_control(const Twist2D& t) {
    if (navigator_ && goal_in_flight()) navigator_->cancel_goal(navigator_->goals().current()->handle);
    sim_.clear_collision();
    teleop_twist_ = t;
  }

  void update_estimate(bool first) {
    if (mode_ == StackMode::kNavigation) {
      amcl_->process(sim_.state().odom_pose, scan_);
      estimate_ = amcl_->pose_at(sim_.state().odom_pose);
      return;
    }
    const Pose2D odom = sim_.state().odom_pose;
    Pose2D guess = compose(map_pose_, relative(last_odom_, odom));
    last_odom_ = odom;
    if (opts_.mapping.scan_match && integrated_ > 0) {
      guess = scan_match(*map_, guess, scan_, opts_.mapping.matcher).pose;
    }
    map_pose_ = guess;
    estimate_ = map_pose_;
    if (!world_to_cell(*map_, map_pose_)) return;
    integrate_scan(*map_, map_pose_, scan_, opts_.mapping.sensor);
    ++integrated_;
    const double now = sim_.state().time;
    if (first || now - last_publish_ >= opts_.mapping.publish_period - 1e-9) {
      published_map_ = std::make_shared<const OccupancyGrid>(*map_);
      ++map_version_;
      last_publish_ = now;
    }
  }

  StackOptions opts_;
  Simulator sim_;
  StackMode mode_;

  std::shared_ptr<OccupancyGrid> map_;
  std::shared_ptr<const OccupancyGrid> published_map_;
  std::uint64_t map_version_ = 0;
  double last_publish_ = 0.0;
  std::shared_ptr<const Costmap> costmap_;
  std::optional<Amcl> amcl_;
  std::optional<Navigator> navigator_;

  Pose2D last_odom_{};
  Pose2D map_pose_{};
  Pose2D estimate_{};
  LaserScan scan_;
  int integrated_ = 0;

  TeleopState teleop_;
  Twist2D teleop_twist_{};
  Twist2D last_command_{};
  std::uint64_t ticks_ = 0;
  std::uint64_t snapshot_seq_ = 0;

  std::mutex mu_;  // guards the fields below
  std::deque<StackCommand> queue_;
  StackOptions pending_opts_;
  std::set<GoalHandle> issued_;
  GoalHandle next_handle_ = 1;
};

}  // namespace minibot

#endif  // MINIBOT_STACK_HPP_
