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

#ifndef MINIBOT_CLI_HPP_
#define MINIBOT_CLI_HPP_

// The pieces behind the `minibot` subcommands that are worth testing on
// their own: the goal sender, the map saver, the teleop key loop and the
// argument parsers. tools/minibot.cpp only wires them to the command line.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "minibot/benchmark.hpp"
#include "minibot/bridge/client.hpp"
#include "minibot/bridge/protocol.hpp"
#include "minibot/demo_world.hpp"
#include "minibot/map_io.hpp"
#include "minibot/stack.hpp"

namespace minibot::cli {

using bridge::json;

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // ran, but the goal or the save failed
inline constexpr int kExitUsage = 2;   // bad arguments

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Whole-string decimal parse; rejects trailing junk, NaN and infinities.
inline double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw UsageError(what + " must be a number, got '" + text + "'");
  }
  return v;
}

// "x,y,theta"
inline Pose2D parse_pose(const std::string& text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    v.push_back(parse_number(text.substr(start, comma - start), "pose component"));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (v.size() != 3) throw UsageError("pose must be x,y,theta, got '" + text + "'");
  return Pose2D(v[0], v[1], v[2]);
}

// "min:max,min:max,..." or "default" for the six standard pairs.
inline std::vector<SpeedPair> parse_pairs(const std::string& text) {
  if (text == "default") return default_speed_pairs();
  std::vector<SpeedPair> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item = text.substr(start, comma - start);
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("pair must be min_vel_x:max_vel_x, got '" + item + "'");
    out.push_back({parse_number(item.substr(0, colon), "min_vel_x"),
                   parse_number(item.substr(colon + 1), "max_vel_x")});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logging in the style of the original goal script:
//   [INFO] [<wall seconds>, <sim seconds>]: message

inline void log_info(std::ostream& out, double sim_time, const std::string& msg) {
  const double wall = std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "[INFO] [%.6f, %.6f]: ", wall, sim_time);
  out << buf << msg << "\n" << std::flush;
}

// ---------------------------------------------------------------------------
// Goal sending

// What `navigate` needs from whoever runs the navigator: an in-process
// stack or a `serve` instance across the bridge.
class GoalClient {
 public:
  virtual ~GoalClient() = default;
  virtual void wait_for_server() = 0;
  virtual double sim_time() = 0;
  // Returns the goal handle; throws std::runtime_error when rejected.
  virtual GoalHandle send_goal(const NavGoal& goal) = 0;
  // Blocks until the goal is terminal or `timeout` simulated seconds pass.
  virtual std::optional<GoalStatus> wait_for_result(GoalHandle h, double timeout) = 0;
};

// Runs a private stack to completion, as fast as the CPU allows.
class LocalGoalClient : public GoalClient {
 public:
  explicit LocalGoalClient(Stack& stack) : stack_(stack) {}

  void wait_for_server() override {
    if (stack_.mode() != StackMode::kNavigation) throw std::runtime_error("stack has no static map");
  }
  double sim_time() override { return stack_.sim().state().time; }

  GoalHandle send_goal(const NavGoal& goal) override {
    const Ack a = stack_.submit(GoalCommand{goal});
    if (!a.accepted) throw std::runtime_error("goal rejected: " + a.reason);
    return *a.handle;
  }

  std::optional<GoalStatus> wait_for_result(GoalHandle h, double timeout) override {
    const double t0 = sim_time();
    while (sim_time() - t0 < timeout) {
      stack_.step();
      if (auto st = stack_.goal_status(h); st && is_terminal(st->state)) return st;
    }
    return std::nullopt;
  }

 private:
  Stack& stack_;
};

// Talks to a running `serve` over /ws.
class BridgeGoalClient : public GoalClient {
 public:
  BridgeGoalClient(std::string host, unsigned short port) : host_(std::move(host)), port_(port) {}

  void wait_for_server() override {
    client_.connect(host_, port_);
    if (!client_.receive_type("hello", std::chrono::seconds(5))) throw std::runtime_error("no hello from server");
    track(client_.receive_type("snapshot", std::chrono::seconds(5)));
  }
  double sim_time() override { return sim_time_; }

  GoalHandle send_goal(const NavGoal& goal) override {
    const json ack = client_.request(bridge::set_goal_message(goal));
    if (!ack.value("accepted", false)) {
      throw std::runtime_error("goal rejected: " + ack.value("reason", std::string()));
    }
    return ack.at("handle").get<GoalHandle>();
  }

  std::optional<GoalStatus> wait_for_result(GoalHandle h, double timeout) override {
    const double t0 = sim_time_;
    while (sim_time_ - t0 < timeout) {
      const auto snap = client_.receive_type("snapshot", std::chrono::seconds(10));
      if (!snap) throw std::runtime_error("server stopped sending snapshots");
      track(snap);
      const json& g = (*snap)["goal_status"];
      if (g.is_null()) continue;
      const auto handle = g.at("handle").get<GoalHandle>();
      GoalStatus st;
      st.handle = h;
      st.elapsed = g.value("elapsed", 0.0);
      st.reason = g.value("reason", std::string());
      if (handle > h) {
        // A newer goal took over the navigator, which preempts ours.
        st.state = GoalState::kPreempted;
        st.reason = "replaced by goal " + std::to_string(handle);
        return st;
      }
      if (handle != h) continue;
      const std::string state = g.at("state").get<std::string>();
      for (GoalState s : {GoalState::kSucceeded, GoalState::kAborted, GoalState::kPreempted}) {
        if (state == to_string(s)) {
          st.state = s;
          return st;
        }
      }
    }
    return std::nullopt;
  }

 private:
  void track(const std::optional<json>& snap) {
    if (snap) sim_time_ = snap->value("sim_time", sim_time_);
  }

  std::string host_;
  unsigned short port_;
  bridge::Client client_;
  double sim_time_ = 0.0;
};

// `navigate <x> <w>`: a goal x metres ahead of the robot with heading given
// by the quaternion scalar w, logged like the original script. Returns the
// process exit code.
inline int run_navigate(const std::vector<std::string>& args, GoalClient& client, std::ostream& out,
                        std::ostream& err, double timeout = 600.0) {
  NavGoal goal;
  try {
    if (args.size() != 2) throw UsageError("navigate takes exactly two arguments: <x> <w>");
    goal.frame = GoalFrame::kRobot;
    goal.x = parse_number(args[0], "x");
    goal.quat_w = parse_number(args[1], "w");
    if (goal.quat_w < -1.0 || goal.quat_w > 1.0) throw UsageError("w must lie in [-1, 1], got " + args[1]);
  } catch (const UsageError& e) {
    err << "navigate: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    log_info(out, client.sim_time(), "Set X = " + args[0]);
    log_info(out, client.sim_time(), "Set W = " + args[1]);
    log_info(out, client.sim_time(), "Waiting for server");
    client.wait_for_server();
    log_info(out, client.sim_time(), "Sending Goals");
    const GoalHandle h = client.send_goal(goal);
    log_info(out, client.sim_time(), "Waiting for server");
    const auto st = client.wait_for_result(h, timeout);
    if (!st) {
      log_info(out, client.sim_time(), "Result: timeout");
      return kExitFailed;
    }
    std::string line = "Result: " + std::string(to_string(st->state));
    if (!st->reason.empty()) line += " (" + st->reason + ")";
    log_info(out, client.sim_time(), line);
    return st->state == GoalState::kSucceeded ? kExitOk : kExitFailed;
  } catch (const std::exception& e) {
    err << "navigate: " << e.what() << "\n";
    return kExitFailed;
  }
}

// ---------------------------------------------------------------------------
// Map saving

// Pulls the current map from a `serve` instance that is building one.
// Throws std::runtime_error("no live mapping session ...") when there is
// none to save from.
inline OccupancyGrid fetch_live_map(const std::string& host, unsigned short port) {
  bridge::Client c;
  try {
    c.connect(host, port, std::chrono::seconds(3));
  } catch (const std::exception& e) {
    throw std::runtime_error("no live mapping session at " + host + ":" + std::to_string(port) + " (" +
                             e.what() + ")");
  }
  // Every client's first snapshot carries the map.
  const auto snap = c.receive_type("snapshot", std::chrono::seconds(5));
  c.close();
  if (!snap) throw std::runtime_error("no live mapping session: server sent no snapshot");
  if (snap->value("mode", std::string()) != "mapping") {
    throw std::runtime_error("no live mapping session: server is in " + snap->value("mode", std::string()) +
                             " mode");
  }
  if (!snap->contains("map")) throw std::runtime_error("no live mapping session: snapshot carried no map");
  return bridge::map_from_json((*snap)["map"]);
}

// `map-saver -f <basename>`: writes <basename>.pgm and <basename>.yaml.
inline int run_map_saver(const std::string& basename, const std::string& host, unsigned short port,
                         std::ostream& out, std::ostream& err) {
  if (basename.empty()) {
    err << "map-saver: usage: map-saver -f <basename>\n";
    return kExitUsage;
  }
  try {
    const OccupancyGrid map = fetch_live_map(host, port);
    out << "Received a " << map.width << " X " << map.height << " map @ " << detail::format_fixed6(map.resolution)
        << " m/pix\n";
    save_map(map, basename);
    out << "Writing map occupancy data to " << basename << ".pgm\n";
    out << "Writing map metadata to " << basename << ".yaml\n";
    out << "Done\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "map-saver: " << e.what() << "\n";
    return kExitFailed;
  }
}

// ---------------------------------------------------------------------------
// Teleop

inline std::string teleop_banner() {
  return "Reading from the keyboard and publishing to the robot.\n"
         "Keys (key, action):\n" +
         key_table_text() + "Ctrl-C or end of input to quit.\n";
}

// Reads keys from `in` until end of input or Ctrl-C and sends the mapped
// ones through `send`. A local TeleopState mirrors the server's so the
// current speeds can be echoed. Returns the number of keys sent.
template <class Send>
int run_teleop(std::istream& in, Send&& send, std::ostream& out) {
  TeleopState mirror;
  int sent = 0;
  char key;
  while (in.get(key)) {
    if (key == 3 || key == 4) break;  // Ctrl-C, Ctrl-D in raw mode
    if (find_binding(key) == nullptr) continue;
    send(key);
    ++sent;
    teleop_key(mirror, key);
    char buf[96];
    std::snprintf(buf, sizeof buf, "currently:\tspeed %.4g\tturn %.4g\n", mirror.linear_speed * mirror.scale_linear,
                  mirror.angular_speed * mirror.scale_angular);
    out << buf << std::flush;
  }
  return sent;
}

// ---------------------------------------------------------------------------
// Launching a stack

struct LaunchOptions {
  std::string world = "demo";  // "demo" or a map basename used as ground truth
  std::string map;             // static map basename; empty means build one
  double resolution = 0.05;    // demo world resolution
  std::optional<Pose2D> start;
  std::uint64_t seed = 1;
  StackOptions stack{};
};

inline std::unique_ptr<Stack> make_stack(const LaunchOptions& o) {
  OccupancyGrid world = o.world == "demo" ? make_demo_world(o.resolution) : load_map(o.world);
  std::optional<OccupancyGrid> static_map;
  if (!o.map.empty()) static_map = load_map(o.map);
  const Pose2D start = o.start ? *o.start : demo_course().start;
  return std::make_unique<Stack>(std::move(world), start, o.seed, o.stack, std::move(static_map));
}

}  // namespace minibot::cli

#endif  // MINIBOT_CLI_HPP_
