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

#ifndef MINIBOT_BRIDGE_PROTOCOL_HPP_
#define MINIBOT_BRIDGE_PROTOCOL_HPP_

// JSON messages exchanged on the bridge's /ws endpoint. docs/protocol.md is
// the human-readable description; the tests pin every field named here.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "minibot/stack.hpp"
#include "minibot/teleop.hpp"

namespace minibot::bridge {

using nlohmann::json;

inline constexpr int kProtocolVersion = 1;

// ---------------------------------------------------------------------------
// Map payload: trinary cells, run-length encoded, row-major from cell (0, 0)
// (the lowest-y row first). Each run is a decimal count followed by one of
// O (occupied), F (free), U (unknown), e.g. "12U3O".

inline char cell_letter(CellClass c) {
  switch (c) {
    case CellClass::kOccupied: return 'O';
    case CellClass::kFree: return 'F';
    case CellClass::kUnknown: break;
  }
  return 'U';
}

inline std::string rle_encode(const OccupancyGrid& g) {
  std::string out;
  const std::size_t n = g.size();
  std::size_t i = 0;
  while (i < n) {
    const char c = cell_letter(g.classify(i));
    std::size_t j = i + 1;
    while (j < n && cell_letter(g.classify(j)) == c) ++j;
    out += std::to_string(j - i);
    out += c;
    i = j;
  }
  return out;
}

// Inverse of rle_encode; throws std::invalid_argument on malformed input or
// a cell count other than `expected`.
inline std::vector<CellClass> rle_decode(std::string_view text, std::size_t expected) {
  std::vector<CellClass> out;
  out.reserve(expected);
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t count = 0;
    const std::size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      count = count * 10 + static_cast<std::size_t>(text[i] - '0');
      if (count > expected) throw std::invalid_argument("rle: run longer than the map");
      ++i;
    }
    if (i == start || i == text.size() || count == 0) throw std::invalid_argument("rle: bad run");
    CellClass c;
    switch (text[i]) {
      case 'O': c = CellClass::kOccupied; break;
      case 'F': c = CellClass::kFree; break;
      case 'U': c = CellClass::kUnknown; break;
      default: throw std::invalid_argument("rle: bad cell letter");
    }
    ++i;
    if (out.size() + count > expected) throw std::invalid_argument("rle: too many cells");
    out.insert(out.end(), count, c);
  }
  if (out.size() != expected) throw std::invalid_argument("rle: too few cells");
  return out;
}

// ---------------------------------------------------------------------------
// Server to client

inline json pose_json(const Pose2D& p) { return json{{"x", p.x}, {"y", p.y}, {"theta", p.theta}}; }

inline json pose_list_json(const std::vector<Pose2D>& poses) {
  json out = json::array();
  for (const Pose2D& p : poses) out.push_back(json::array({p.x, p.y, p.theta}));
  return out;
}

inline json map_json(const OccupancyGrid& g, std::uint64_t version) {
  return json{{"version", version},
              {"width", g.width},
              {"height", g.height},
              {"resolution", g.resolution},
              {"origin", pose_json(g.origin)},
              {"cells", rle_encode(g)}};
}

// Rebuilds a trinary grid from a "map" payload. Throws std::invalid_argument
// on a malformed payload.
inline OccupancyGrid map_from_json(const json& m) {
  try {
    OccupancyGrid g(m.at("width").get<int>(), m.at("height").get<int>(), m.at("resolution").get<double>(),
                    Pose2D(m.at("origin").at("x").get<double>(), m.at("origin").at("y").get<double>(),
                           m.at("origin").at("theta").get<double>()));
    const auto cells = rle_decode(m.at("cells").get<std::string>(), g.size());
    for (std::size_t i = 0; i < cells.size(); ++i) g.set_class(i, cells[i]);
    return g;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("map payload: ") + e.what());
  }
}

inline json goal_status_json(const GoalStatus& s) {
  return json{{"handle", s.handle},
              {"state", std::string(to_string(s.state))},
              {"target", pose_json(s.target)},
              {"elapsed", s.elapsed},
              {"reason", s.reason}};
}

// Scans go out with every `scan_stride`-th beam; the stride is reported so
// the bearing of entry k is angle_min + k * angle_increment.
inline json snapshot_json(const Snapshot& s, bool include_map, int scan_stride = 1) {
  if (scan_stride < 1) scan_stride = 1;
  const ScanConfig& sc = s.scan.config;
  json ranges = json::array();
  for (std::size_t i = 0; i < s.scan.ranges.size(); i += static_cast<std::size_t>(scan_stride)) {
    ranges.push_back(s.scan.ranges[i]);
  }
  json out{{"type", "snapshot"},
           {"version", kProtocolVersion},
           {"seq", s.seq},
           {"sim_time", s.sim_time},
           {"mode", std::string(to_string(s.mode))},
           {"true_pose", pose_json(s.true_pose)},
           {"estimated_pose", pose_json(s.estimated_pose)},
           {"particles", pose_list_json(s.particles)},
           {"scan",
            {{"angle_min", sc.angle_min},
             {"angle_increment", sc.increment() * scan_stride},
             {"range_min", sc.range_min},
             {"range_max", sc.range_max},
             {"ranges", std::move(ranges)}}},
           {"map_version", s.map_version},
           {"global_path", pose_list_json(s.global_path)},
           {"goal_status", s.goal_status ? goal_status_json(*s.goal_status) : json(nullptr)},
           {"collision", s.collision},
           {"command", {{"v", s.command.v}, {"w", s.command.w}}}};
  if (include_map && s.map) out["map"] = map_json(*s.map, s.map_version);
  return out;
}

// Tracks which map version a client has seen, so the map payload rides only
// on the first snapshot after a change.
class MapDelta {
 public:
  bool needs_map(const Snapshot& s) const {
    return s.map != nullptr && (!sent_ || *sent_ != s.map_version);
  }
  void mark_sent(const Snapshot& s) { sent_ = s.map_version; }

  // Serializes `s` for this client and records the map as delivered.
  std::string encode(const Snapshot& s, int scan_stride = 1) {
    const bool with_map = needs_map(s);
    std::string text = snapshot_json(s, with_map, scan_stride).dump();
    if (with_map) mark_sent(s);
    return text;
  }

 private:
  std::optional<std::uint64_t> sent_;
};

inline json ack_json(const Ack& a, const json& id = nullptr) {
  return json{{"type", "ack"},
              {"version", kProtocolVersion},
              {"id", id},
              {"accepted", a.accepted},
              {"reason", a.reason},
              {"handle", a.handle ? json(*a.handle) : json(nullptr)}};
}

// The shared key table: what `minibot teleop` prints and the web UI binds.
inline json keymap_json() {
  json keys = json::array();
  for (const KeyBinding& b : kKeyTable) {
    keys.push_back(json{{"key", std::string(1, b.key)},
                        {"kind", b.kind == KeyBinding::Kind::kMove ? "move" : "speed"},
                        {"help", b.help}});
  }
  return json{{"version", kProtocolVersion}, {"keys", std::move(keys)}};
}

inline json hello_json() {
  return json{{"type", "hello"}, {"version", kProtocolVersion}, {"keymap", keymap_json()["keys"]}};
}

// ---------------------------------------------------------------------------
// Client to server

// Map-frame heading as the scalar part of a yaw-only quaternion. Yaw is
// taken in [0, 2pi) so that every heading has a distinct w in [-1, 1].
inline double yaw_to_quat_w(double yaw) {
  double y = std::fmod(yaw, 2.0 * kPi);
  if (y < 0.0) y += 2.0 * kPi;
  return std::cos(y / 2.0);
}

struct ParsedCommand {
  std::optional<StackCommand> command;  // empty when rejected
  json id = nullptr;                    // echoed in the ack
  std::string error;
};

namespace detail {

inline double number_field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw std::invalid_argument(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument(std::string("field '") + key + "' must be finite");
  return v;
}

inline StackCommand parse_set_goal(const json& j) {
  const std::string frame = j.value("frame", std::string("map"));
  NavGoal g;
  g.x = number_field(j, "x");
  g.y = j.contains("y") ? number_field(j, "y") : 0.0;
  const bool has_yaw = j.contains("yaw");
  const bool has_w = j.contains("quat_w");
  if (has_yaw == has_w) throw std::invalid_argument("set_goal needs exactly one of 'yaw', 'quat_w'");
  g.quat_w = has_yaw ? yaw_to_quat_w(number_field(j, "yaw")) : number_field(j, "quat_w");
  if (frame == "map") {
    g.frame = GoalFrame::kMap;
  } else if (frame == "robot") {
    g.frame = GoalFrame::kRobot;
  } else {
    throw std::invalid_argument("unknown goal frame '" + frame + "'");
  }
  return GoalCommand{g};
}

}  // namespace detail

// Parses one client text frame. Never throws: problems come back in
// `error` and the caller answers with a rejecting ack.
inline ParsedCommand parse_command(std::string_view text) {
  ParsedCommand out;
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    out.error = "malformed JSON";
    return out;
  }
  if (!j.is_object()) {
    out.error = "command must be a JSON object";
    return out;
  }
  if (j.contains("id")) out.id = j["id"];
  const auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string()) {
    out.error = "missing string field 'kind'";
    return out;
  }
  const std::string kind = kind_it->get<std::string>();
  try {
    if (kind == "teleop_key") {
      const auto k = j.find("key");
      if (k == j.end() || !k->is_string() || k->get<std::string>().size() != 1) {
        throw std::invalid_argument("teleop_key needs a one-character 'key'");
      }
      out.command = TeleopKeyCommand{k->get<std::string>()[0]};
    } else if (kind == "set_goal") {
      out.command = detail::parse_set_goal(j);
    } else if (kind == "cancel_goal") {
      const auto h = j.find("handle");
      if (h == j.end() || !h->is_number_unsigned()) {
        throw std::invalid_argument("cancel_goal needs a non-negative integer 'handle'");
      }
      out.command = CancelCommand{h->get<GoalHandle>()};
    } else if (kind == "set_param") {
      const auto k = j.find("key");
      const auto v = j.find("value");
      if (k == j.end() || !k->is_string()) throw std::invalid_argument("set_param needs a string 'key'");
      if (v == j.end() || !(v->is_string() || v->is_number() || v->is_boolean())) {
        throw std::invalid_argument("set_param needs a 'value'");
      }
      std::string value = v->is_string() ? v->get<std::string>() : v->dump();
      out.command = ParamCommand{k->get<std::string>(), std::move(value)};
    } else {
      throw std::invalid_argument("unknown kind '" + kind + "'");
    }
  } catch (const std::invalid_argument& e) {
    out.error = e.what();
  }
  return out;
}

// Parses and submits one frame; the returned JSON is the ack to send back.
inline json handle_command(Stack& stack, std::string_view text) {
  ParsedCommand p = parse_command(text);
  if (!p.command) return ack_json(Ack{false, p.error, std::nullopt}, p.id);
  return ack_json(stack.submit(std::move(*p.command)), p.id);
}

// Client-side helpers.
inline json teleop_key_message(char key) { return json{{"kind", "teleop_key"}, {"key", std::string(1, key)}}; }

inline json set_goal_message(const NavGoal& g) {
  return json{{"kind", "set_goal"},
              {"frame", g.frame == GoalFrame::kMap ? "map" : "robot"},
              {"x", g.x},
              {"y", g.y},
              {"quat_w", g.quat_w}};
}

}  // namespace minibot::bridge

#endif  // MINIBOT_BRIDGE_PROTOCOL_HPP_
