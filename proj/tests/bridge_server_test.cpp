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

#include <gtest/gtest.h>

#include <chrono>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "minibot/bridge/client.hpp"
#include "minibot/bridge/server.hpp"
#include "minibot/demo_world.hpp"

namespace minibot::bridge {
namespace {

using namespace std::chrono_literals;

// A navigation-mode stack behind a live server on a free port.
struct Harness {
  explicit Harness(double speedup = 1.0, bool with_map = true)
      : world(make_demo_world(0.05)),
        stack(world, Pose2D(-3.0, -3.0, 0.0), 1, StackOptions{},
              with_map ? std::optional<OccupancyGrid>(world) : std::nullopt),
        loop(stack, speedup),
        server(ServerOptions{0, "127.0.0.1", 4}, [this](std::string_view t) { return handle_command(stack, t); }) {
    server.start();
    loop.start([this](std::shared_ptr<const Snapshot> s) { server.publish(std::move(s)); });
  }
  ~Harness() {
    loop.stop();
    server.stop();
  }

  OccupancyGrid world;
  Stack stack;
  SimLoop loop;
  Server server;
};

std::vector<std::uint64_t> read_seqs(Client& c, int n) {
  std::vector<std::uint64_t> out;
  while (static_cast<int>(out.size()) < n) {
    auto m = c.receive_type("snapshot", 5s);
    if (!m) break;
    out.push_back((*m)["seq"].get<std::uint64_t>());
  }
  return out;
}

TEST(BridgeServerTest, RunsWithoutClients) {
  Harness h(0.0);
  std::this_thread::sleep_for(200ms);
  EXPECT_EQ(h.server.client_count(), 0u);
  const auto ticks = h.loop.with_stack([](Stack& s) { return s.ticks(); });
  EXPECT_GT(ticks, 0u);
}

TEST(BridgeServerTest, HelloThenSnapshotWithMapOnce) {
  Harness h;
  Client c;
  c.connect("127.0.0.1", h.server.port());
  const auto hello = c.receive(5s);
  ASSERT_TRUE(hello);
  EXPECT_EQ((*hello)["type"], "hello");
  EXPECT_EQ((*hello)["version"], kProtocolVersion);
  EXPECT_EQ((*hello)["keymap"], keymap_json()["keys"]);

  const auto first = c.receive_type("snapshot", 5s);
  ASSERT_TRUE(first);
  ASSERT_TRUE(first->contains("map"));
  EXPECT_EQ((*first)["map"]["width"], h.world.width);
  const auto second = c.receive_type("snapshot", 5s);
  ASSERT_TRUE(second);
  EXPECT_FALSE(second->contains("map"));  // map_version unchanged
  EXPECT_EQ((*second)["map_version"], (*first)["map_version"]);
  EXPECT_GT((*second)["seq"], (*first)["seq"]);
}

TEST(BridgeServerTest, MappingModeResendsTheMapWhenItChanges) {
  Harness h(1.0, false);
  Client c;
  c.connect("127.0.0.1", h.server.port());
  std::uint64_t last_version = 0;
  int maps = 0;
  for (int i = 0; i < 25; ++i) {
    const auto s = c.receive_type("snapshot", 5s);
    ASSERT_TRUE(s);
    const std::uint64_t v = (*s)["map_version"];
    EXPECT_EQ(s->contains("map"), v != last_version) << "seq " << (*s)["seq"];
    if (s->contains("map")) ++maps;
    last_version = v;
  }
  EXPECT_GE(maps, 2);  // default publish period is well under 2.5 s
}

TEST(BridgeServerTest, TwoClientsSeeIdenticalSeqStreams) {
  Harness h;
  Client a, b;
  a.connect("127.0.0.1", h.server.port());
  b.connect("127.0.0.1", h.server.port());
  const auto sa = read_seqs(a, 20);
  const auto sb = read_seqs(b, 20);
  ASSERT_EQ(sa.size(), 20u);
  ASSERT_EQ(sb.size(), 20u);
  // The clients joined at slightly different times; on the common range the
  // streams agree element for element.
  const std::uint64_t lo = std::max(sa.front(), sb.front());
  const std::uint64_t hi = std::min(sa.back(), sb.back());
  ASSERT_LT(lo, hi);
  std::vector<std::uint64_t> ca, cb;
  for (auto s : sa) if (s >= lo && s <= hi) ca.push_back(s);
  for (auto s : sb) if (s >= lo && s <= hi) cb.push_back(s);
  EXPECT_EQ(ca, cb);
  EXPECT_GE(ca.size(), 10u);
}

TEST(BridgeServerTest, CommandsAreAckedAndConnectionSurvivesBadFrames) {
  Harness h;
  Client c;
  c.connect("127.0.0.1", h.server.port());
  json ack = c.request(json{{"kind", "zzz"}});
  EXPECT_FALSE(ack["accepted"]);
  EXPECT_EQ(ack["reason"], "unknown kind 'zzz'");

  c.send(json("not an object"));
  ack = *c.receive_type("ack", 5s);
  EXPECT_FALSE(ack["accepted"]);

  ack = c.request(json{{"kind", "set_param"}, {"key", "planner.max_vel_x"}, {"value", 0.3}});
  EXPECT_TRUE(ack["accepted"]) << ack.dump();
  EXPECT_TRUE(c.receive_type("snapshot", 5s).has_value());
}

TEST(BridgeServerTest, GoalAtTheRobotSucceeds) {
  Harness h;
  Client c;
  c.connect("127.0.0.1", h.server.port());
  const auto first = c.receive_type("snapshot", 5s);
  ASSERT_TRUE(first);
  const json& p = (*first)["estimated_pose"];
  const json ack = c.request(json{{"kind", "set_goal"},
                                  {"x", p["x"]},
                                  {"y", p["y"]},
                                  {"yaw", p["theta"]}});
  ASSERT_TRUE(ack["accepted"]) << ack.dump();
  const auto handle = ack["handle"].get<GoalHandle>();
  bool done = false;
  for (int i = 0; i < 50 && !done; ++i) {
    const auto s = c.receive_type("snapshot", 5s);
    ASSERT_TRUE(s);
    const json& g = (*s)["goal_status"];
    if (!g.is_null() && g["handle"] == handle && g["state"] == "Succeeded") done = true;
  }
  EXPECT_TRUE(done);
}

TEST(BridgeServerTest, ServesTheKeymap) {
  Harness h;
  const json served = json::parse(http_get("127.0.0.1", h.server.port(), "/keymap.json"));
  EXPECT_EQ(served, keymap_json());
  EXPECT_THROW(http_get("127.0.0.1", h.server.port(), "/nothing"), std::runtime_error);
}

// A client that stops reading loses snapshots but never an ack, and what it
// does receive is still in strictly increasing seq order.
TEST(BridgeServerTest, SlowClientKeepsOrderAndAcks) {
  Harness h(0.0);
  Client slow;
  slow.connect("127.0.0.1", h.server.port());
  slow.send(json{{"kind", "zzz"}, {"id", 1}});
  std::this_thread::sleep_for(1500ms);
  const auto ticks = h.loop.with_stack([](Stack& s) { return s.ticks(); });

  std::vector<std::uint64_t> seqs;
  bool acked = false;
  const auto deadline = std::chrono::steady_clock::now() + 5s;
  while (std::chrono::steady_clock::now() < deadline && (seqs.size() < 50 || !acked)) {
    auto m = slow.receive(5s);
    ASSERT_TRUE(m);
    if ((*m)["type"] == "ack") {
      EXPECT_EQ((*m)["id"], 1);
      acked = true;
    } else if ((*m)["type"] == "snapshot") {
      seqs.push_back((*m)["seq"]);
    }
  }
  EXPECT_TRUE(acked);
  ASSERT_GE(seqs.size(), 50u);
  for (std::size_t i = 1; i < seqs.size(); ++i) EXPECT_LT(seqs[i - 1], seqs[i]);
  // The simulation kept ticking at full speed while the reader was away.
  EXPECT_GT(ticks, 1000u);
}

}  // namespace
}  // namespace minibot::bridge
