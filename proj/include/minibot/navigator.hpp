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

#ifndef MINIBOT_NAVIGATOR_HPP_
#define MINIBOT_NAVIGATOR_HPP_

#include <cmath>
#include <memory>
#include <optional>
#include <string>

#include "minibot/costmap.hpp"
#include "minibot/global_planner.hpp"
#include "minibot/goals.hpp"
#include "minibot/local_planner.hpp"
#include "minibot/world.hpp"

namespace minibot {

struct NavCommand {
  Twist2D twist{};
  std::optional<GoalStatus> status;  // the current goal after this tick
};

// Goal execution loop: plans globally when a goal arrives, follows the plan
// with the rollout planner every tick, rotates in place once inside the
// position tolerance, replans once when the local planner finds no feasible
// trajectory and aborts if that does not help.
class Navigator {
 public:
  Navigator(std::shared_ptr<const Costmap> costmap, PlannerConfig cfg, double control_period)
      : costmap_(std::move(costmap)), cfg_(cfg), period_(control_period) {
    if (!costmap_) throw std::invalid_argument("Navigator: null costmap");
    cfg_.validate();
  }

  GoalManager& goals() { return goals_; }
  const GoalManager& goals() const { return goals_; }
  const PlannerConfig& config() const { return cfg_; }
  void set_config(const PlannerConfig& cfg) {
    cfg.validate();
    cfg_ = cfg;
  }
  void set_costmap(std::shared_ptr<const Costmap> cm) { costmap_ = std::move(cm); }
  const Costmap& costmap() const { return *costmap_; }
  const Path& path() const { return path_; }
  const std::optional<Trajectory>& last_trajectory() const { return last_trajectory_; }

  GoalHandle send_goal(const NavGoal& g, const Pose2D& robot_pose,
                       std::optional<GoalHandle> handle = std::nullopt) {
    return send_goal(resolve_goal(g, robot_pose), handle);
  }
  GoalHandle send_goal(const Pose2D& target, std::optional<GoalHandle> handle = std::nullopt) {
    const GoalHandle h = goals_.send_goal(target, handle);
    reset_motion();
    return h;
  }
  GoalStatus cancel_goal(GoalHandle h) {
    GoalStatus st = goals_.cancel_goal(h);
    if (const auto* cur = goals_.current(); cur && cur->handle == h) reset_motion();
    return st;
  }

  NavCommand tick(const Pose2D& pose, bool collision, double dt) {
    NavCommand out;
    GoalStatus* goal = goals_.current();
    if (goal == nullptr) return out;
    goal->feedback = pose;
    if (is_terminal(goal->state)) {
      out.status = *goal;
      return out;
    }

    if (goal->state == GoalState::kPending) {
      goals_.transition(goal->handle, GoalState::kActive);
      replanned_ = false;
      if (!make_plan(pose, *goal)) {
        finish(*goal, GoalState::kAborted, "global planning failed: " + plan_reason_);
        out.status = *goal;
        return out;
      }
    } else {
      goal->elapsed += dt;
    }

    if (collision) {
      finish(*goal, GoalState::kAborted, "collision");
      out.status = *goal;
      return out;
    }
    if (goal_reached(pose, goal->target, cfg_)) {
      finish(*goal, GoalState::kSucceeded, {});
      out.status = *goal;
      return out;
    }

    Twist2D cmd;
    if (planar_distance(pose, goal->target) <= cfg_.xy_goal_tolerance) {
      cmd = rotate_towards(pose, goal->target.theta);
    } else {
      const LocalPlan lp = plan_local(*costmap_, pose, last_cmd_, path_, cfg_, period_);
      if (!lp.ok && !replanned_) {
        // Halt for this tick and replan; the next tick retries from rest.
        replanned_ = true;
        if (!make_plan(pose, *goal)) {
          finish(*goal, GoalState::kAborted, "global planning failed: " + plan_reason_);
          out.status = *goal;
          return out;
        }
        reset_motion();
        out.status = *goal;
        return out;
      }
      if (!lp.ok) {
        finish(*goal, GoalState::kAborted, "no collision-free trajectory");
        out.status = *goal;
        return out;
      }
      replanned_ = false;
      last_trajectory_ = lp.best;
      cmd = lp.twist;
    }
    last_cmd_ = cmd;
    out.twist = cmd;
    out.status = *goal;
    return out;
  }

 private:
  bool make_plan(const Pose2D& pose, const GoalStatus& goal) {
    GlobalPlan gp = plan_global(*costmap_, pose, goal.target);
    if (!gp.ok) {
      plan_reason_ = gp.reason;
      path_.clear();
      return false;
    }
    path_ = std::move(gp.path);
    return true;
  }

  void finish(GoalStatus& goal, GoalState state, std::string reason) {
    goals_.transition(goal.handle, state, std::move(reason));
    reset_motion();
  }

  void reset_motion() {
    last_cmd_ = {};
    last_trajectory_.reset();
  }

  Twist2D rotate_towards(const Pose2D& pose, double yaw) const {
    const double err = angle_diff(yaw, pose.theta);
    const double reachable = std::abs(last_cmd_.w) + cfg_.acc_lim_theta * period_;
    const double w = std::copysign(std::min({cfg_.max_rot_vel, reachable, std::abs(err) / period_}),
                                   err);
    return {0.0, w};
  }

  std::shared_ptr<const Costmap> costmap_;
  PlannerConfig cfg_;
  double period_;
  GoalManager goals_;
  Path path_;
  std::string plan_reason_;
  std::optional<Trajectory> last_trajectory_;
  Twist2D last_cmd_{};
  bool replanned_ = false;
};

}  // namespace minibot

#endif  // MINIBOT_NAVIGATOR_HPP_
