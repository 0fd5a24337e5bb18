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

#ifndef MINIBOT_TELEOP_HPP_
#define MINIBOT_TELEOP_HPP_

#include <array>
#include <optional>
#include <string>

#include "minibot/world.hpp"

namespace minibot {

// One row of the shared key table. Direction keys carry a (linear, angular)
// sign pattern; speed keys carry multipliers on the stored speeds.
struct KeyBinding {
  char key;
  enum class Kind { kMove, kSpeed } kind;
  int linear_sign;    // kMove
  int angular_sign;   // kMove
  double linear_mul;  // kSpeed
  double angular_mul; // kSpeed
  const char* help;
};

// Layout follows the classic keyboard teleop: the 3x3 block around k steers,
// q/z w/x e/c tune speeds. Backward arcs keep that tool's signs
// (m = backward with negative turn rate).
inline constexpr std::array<KeyBinding, 16> kKeyTable{{
    {'u', KeyBinding::Kind::kMove, 1, 1, 1.0, 1.0, "forward, turning left"},
    {'i', KeyBinding::Kind::kMove, 1, 0, 1.0, 1.0, "forward"},
    {'o', KeyBinding::Kind::kMove, 1, -1, 1.0, 1.0, "forward, turning right"},
    {'j', KeyBinding::Kind::kMove, 0, 1, 1.0, 1.0, "spin left"},
    {'k', KeyBinding::Kind::kMove, 0, 0, 1.0, 1.0, "stop"},
    {'l', KeyBinding::Kind::kMove, 0, -1, 1.0, 1.0, "spin right"},
    {'m', KeyBinding::Kind::kMove, -1, -1, 1.0, 1.0, "backward arc"},
    {',', KeyBinding::Kind::kMove, -1, 0, 1.0, 1.0, "backward"},
    {'.', KeyBinding::Kind::kMove, -1, 1, 1.0, 1.0, "backward arc, other side"},
    {' ', KeyBinding::Kind::kMove, 0, 0, 1.0, 1.0, "stop"},
    {'q', KeyBinding::Kind::kSpeed, 0, 0, 1.1, 1.1, "all speeds x1.1"},
    {'z', KeyBinding::Kind::kSpeed, 0, 0, 0.9, 0.9, "all speeds x0.9"},
    {'w', KeyBinding::Kind::kSpeed, 0, 0, 1.1, 1.0, "linear speed x1.1"},
    {'x', KeyBinding::Kind::kSpeed, 0, 0, 0.9, 1.0, "linear speed x0.9"},
    {'e', KeyBinding::Kind::kSpeed, 0, 0, 1.0, 1.1, "angular speed x1.1"},
    {'c', KeyBinding::Kind::kSpeed, 0, 0, 1.0, 0.9, "angular speed x0.9"},
}};

inline const KeyBinding* find_binding(char key) {
  for (const auto& b : kKeyTable) {
    if (b.key == key) return &b;
  }
  return nullptr;
}

struct TeleopState {
  double linear_speed = 0.1;   // stored speed, before scaling
  double angular_speed = 0.2;
  double scale_linear = 5.0;
  double scale_angular = 5.0;
  int linear_sign = 0;  // last direction pattern
  int angular_sign = 0;

  Twist2D twist() const {
    return {linear_sign * linear_speed * scale_linear, angular_sign * angular_speed * scale_angular};
  }
};

// Applies one key press and returns the twist to emit, or nullopt when the
// key is not bound (state untouched). Speed keys re-emit the current
// direction at the new speed.
inline std::optional<Twist2D> teleop_key(TeleopState& s, char key) {
  const KeyBinding* b = find_binding(key);
  if (b == nullptr) return std::nullopt;
  if (b->kind == KeyBinding::Kind::kMove) {
    s.linear_sign = b->linear_sign;
    s.angular_sign = b->angular_sign;
  } else {
    s.linear_speed *= b->linear_mul;
    s.angular_speed *= b->angular_mul;
  }
  return s.twist();
}

// The key table as printed by `minibot teleop` and served to the web UI.
inline std::string key_table_text() {
  std::string out;
  for (const auto& b : kKeyTable) {
    out += b.key == ' ' ? std::string("space") : std::string(1, b.key);
    out += '\t';
    out += b.help;
    out += '\n';
  }
  return out;
}

}  // namespace minibot

#endif  // MINIBOT_TELEOP_HPP_
