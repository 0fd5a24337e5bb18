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

#ifndef MINIBOT_GOALS_HPP_
#define MINIBOT_GOALS_HPP_

// Goal action protocol: goals are submitted, become active once a plan
// exists, and end Succeeded, Aborted or Preempted. A new goal preempts the
// one in flight.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "minibot/world.hpp"

namespace minibot {

enum class GoalFrame { kMap, kRobot };

struct NavGoal {
  GoalFrame frame = GoalFrame::kRobot;
  double x = 0.0;       // m
  double y = 0.0;       // m
  double quat_w = 1.0;  // scalar part of a yaw-only quaternion
};

enum class GoalState { kPending, kActive, kSucceeded, kAborted, kPreempted };

inline std::string_view to_string(GoalState s) {
  switch (s) {
    case GoalState::kPending: return "Pending";
    case GoalState::kActive: return "Active";
    case GoalState::kSucceeded: return "Succeeded";
    case GoalState::kAborted: return "Aborted";
    case GoalState::kPreempted: return "Preempted";
  }
  return "Unknown";
}

inline bool is_terminal(GoalState s) {
  return s == GoalState::kSucceeded || s == GoalState::kAborted || s == GoalState::kPreempted;
}

inline bool is_legal_transition(GoalState from, GoalState to) {
  switch (from) {
    case GoalState::kPending:
      return to == GoalState::kActive || to == GoalState::kPreempted;
    case GoalState::kActive:
      return to == GoalState::kSucceeded || to == GoalState::kAborted ||
             to == GoalState::kPreempted;
    default:
      return false;
  }
}

using GoalHandle = std::uint64_t;

struct GoalStatus {
  GoalHandle handle = 0;
  GoalState state = GoalState::kPending;
  Pose2D target{};    // map frame
  Pose2D feedback{};  // latest robot pose
  double elapsed = 0.0;
  std::string reason;
};

// Yaw of a rotation about z whose quaternion has scalar part w, taking the
// non-negative z component: yaw = 2 atan2(sqrt(1 - w^2), w).
inline double quat_w_to_yaw(double w) {
  if (!(w >= -1.0 && w <= 1.0)) throw std::invalid_argument("quat_w must lie in [-1, 1]");
  return normalize_angle(2.0 * std::atan2(std::sqrt(1.0 - w * w), w));
}

// Map-frame target of a goal, resolving robot-frame goals against the pose
// at send time.
inline Pose2D resolve_goal(const NavGoal& g, const Pose2D& robot_pose) {
  const double yaw = quat_w_to_yaw(g.quat_w);
  if (g.frame == GoalFrame::kMap) return Pose2D{g.x, g.y, yaw};
  return compose(robot_pose, Pose2D{g.x, g.y, yaw});
}

class GoalManager {
 public:
  // Registers a goal in Pending and preempts whatever was in flight. A
  // caller-chosen handle may be supplied (the command queue pre-assigns them).
  GoalHandle send_goal(const Pose2D& target, std::optional<GoalHandle> handle = std::nullopt) {
    if (current_) {
      auto& cur = goals_.at(*current_);
      if (!is_terminal(cur.state)) set_state(cur, GoalState::kPreempted, "preempted by new goal");
    }
    const GoalHandle h = handle.value_or(next_handle_);
    if (goals_.count(h)) throw std::invalid_argument("duplicate goal handle");
    next_handle_ = std::max(next_handle_, h + 1);
    GoalStatus st;
    st.handle = h;
    st.target = target;
    goals_.emplace(h, st);
    current_ = h;
    return h;
  }

  GoalHandle send_goal(const NavGoal& g, const Pose2D& robot_pose,
                       std::optional<GoalHandle> handle = std::nullopt) {
    return send_goal(resolve_goal(g, robot_pose), handle);
  }

  // Pending/Active goals become Preempted; terminal goals are left alone.
  GoalStatus cancel_goal(GoalHandle h) {
    auto it = goals_.find(h);
    if (it == goals_.end()) throw std::out_of_range("unknown goal handle " + std::to_string(h));
    if (!is_terminal(it->second.state)) set_state(it->second, GoalState::kPreempted, "canceled");
    return it->second;
  }

  const GoalStatus& status(GoalHandle h) const {
    auto it = goals_.find(h);
    if (it == goals_.end()) throw std::out_of_range("unknown goal handle " + std::to_string(h));
    return it->second;
  }

  bool contains(GoalHandle h) const { return goals_.count(h) != 0; }

  // The goal the controller should be working on, if any.
  GoalStatus* current() {
    if (!current_) return nullptr;
    return &goals_.at(*current_);
  }
  const GoalStatus* current() const {
    if (!current_) return nullptr;
    return &goals_.at(*current_);
  }

  void transition(GoalHandle h, GoalState to, std::string reason = {}) {
    set_state(goals_.at(h), to, std::move(reason));
  }

  GoalHandle next_handle() const { return next_handle_; }

 private:
  static void set_state(GoalStatus& st, GoalState to, std::string reason) {
    if (!is_legal_transition(st.state, to)) {
      throw std::logic_error(std::string("illegal goal transition ") +
                             std::string(to_string(st.state)) + " -> " +
                             std::string(to_string(to)));
    }
    st.state = to;
    st.reason = std::move(reason);
  }

  std::map<GoalHandle, GoalStatus> goals_;
  std::optional<GoalHandle> current_;
  GoalHandle next_handle_ = 1;
};

}  // namespace minibot

#endif  // MINIBOT_GOALS_HPP_
