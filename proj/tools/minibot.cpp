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

// minibot: simulator, bridge, teleop, goal sender, map saver and benchmark.

#include <termios.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "minibot/bridge/server.hpp"
#include "minibot/cli.hpp"

namespace {

using namespace minibot;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

// Puts the terminal in raw mode for the lifetime of the object, so keys
// arrive one at a time without echo.
class RawTerminal {
 public:
  RawTerminal() {
    if (!isatty(STDIN_FILENO) || tcgetattr(STDIN_FILENO, &saved_) != 0) return;
    termios raw = saved_;
    raw.c_lflag &= ~static_cast<tcflag_t>(ICANON | ECHO | ISIG);
    raw.c_cc[VMIN] = 1;
    raw.c_cc[VTIME] = 0;
    active_ = tcsetattr(STDIN_FILENO, TCSANOW, &raw) == 0;
  }
  ~RawTerminal() {
    if (active_) tcsetattr(STDIN_FILENO, TCSANOW, &saved_);
  }

 private:
  termios saved_{};
  bool active_ = false;
};

struct Endpoint {
  std::string host = "127.0.0.1";
  unsigned short port = 8765;
};

void add_endpoint(CLI::App* app, Endpoint& e) {
  app->add_option("--host", e.host, "bridge address");
  app->add_option("--port", e.port, "bridge port");
}

void add_launch(CLI::App* app, cli::LaunchOptions& o, std::string& start, double& rate) {
  app->add_option("--world", o.world, "ground-truth world: 'demo' or a map basename");
  app->add_option("--map", o.map, "static map basename; enables localization and goals");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--rate", rate, "simulated seconds per wall second (0 = as fast as possible)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--resolution", o.resolution, "demo world resolution in m/cell")->check(CLI::PositiveNumber);
  app->add_option("--start", start, "start pose x,y,theta (default: the course start)");
}

void print_status(const Snapshot& s) {
  std::printf("t=%7.1f mode=%-10s true=(%.3f, %.3f, %.3f) est=(%.3f, %.3f, %.3f) v=%.3f w=%.3f%s%s\n",
              s.sim_time, std::string(to_string(s.mode)).c_str(), s.true_pose.x, s.true_pose.y,
              s.true_pose.theta, s.estimated_pose.x, s.estimated_pose.y, s.estimated_pose.theta, s.command.v,
              s.command.w, s.collision ? " COLLISION" : "",
              s.goal_status ? (" goal " + std::to_string(s.goal_status->handle) + ":" +
                               std::string(to_string(s.goal_status->state)))
                                  .c_str()
                            : "");
  std::fflush(stdout);
}

int run_sim(cli::LaunchOptions o, const std::string& start, double rate, double duration) {
  if (!start.empty()) o.start = cli::parse_pose(start);
  auto stack = cli::make_stack(o);
  using clock = std::chrono::steady_clock;
  const double dt = stack->sim().dt();
  auto next = clock::now();
  while (!g_stop && (duration <= 0.0 || stack->sim().state().time < duration - 1e-9)) {
    stack->step();
    if (stack->ticks() % 10 == 0) print_status(stack->snapshot());
    if (rate > 0.0) {
      next += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(dt / rate));
      std::this_thread::sleep_until(next);
    }
  }
  return cli::kExitOk;
}

int run_serve(cli::LaunchOptions o, const std::string& start, double rate, const Endpoint& e) {
  if (!start.empty()) o.start = cli::parse_pose(start);
  auto stack = cli::make_stack(o);
  bridge::SimLoop loop(*stack, rate);
  bridge::Server server(bridge::ServerOptions{e.port, e.host, 2},
                        [&](std::string_view text) { return bridge::handle_command(*stack, text); });
  server.start();
  std::cout << "serving " << to_string(stack->mode()) << " session on ws://" << e.host << ":" << server.port()
            << "/ws" << std::endl;
  loop.start([&](std::shared_ptr<const Snapshot> s) { server.publish(std::move(s)); });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  loop.stop();
  server.stop();
  return cli::kExitOk;
}

int run_teleop_cmd(const Endpoint& e) {
  bridge::Client client;
  client.connect(e.host, e.port);
  std::cout << cli::teleop_banner() << std::flush;
  RawTerminal raw;
  cli::run_teleop(
      std::cin,
      [&](char key) {
        const auto ack = client.request(bridge::teleop_key_message(key));
        if (!ack.value("accepted", false)) std::cerr << "rejected: " << ack.value("reason", std::string()) << "\r\n";
      },
      std::cout);
  client.send(bridge::teleop_key_message('k'));
  client.close();
  return cli::kExitOk;
}

int run_benchmark_cmd(const std::string& pairs_text, BenchmarkOptions opts) {
  const auto pairs = cli::parse_pairs(pairs_text);
  std::vector<BenchmarkRow> rows;
  const Course course = demo_course(opts.course);
  const OccupancyGrid world = make_demo_world(opts.resolution);
  for (const SpeedPair& p : pairs) {
    rows.push_back(run_benchmark_case(world, course, p, opts));
    std::fprintf(stderr, "min_vel_x=%g max_vel_x=%g: %s\n", p.min_vel_x, p.max_vel_x,
                 std::string(to_string(rows.back().outcome)).c_str());
  }
  std::cout << format_benchmark_table(rows) << "\n" << format_benchmark_rows(rows);
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minibot: 2D differential-drive robot simulator and navigation stack"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value option file (see `minibot config`)")
      ->check(CLI::ExistingFile);

  cli::LaunchOptions launch;
  std::string start;
  double rate = 1.0;
  double duration = 0.0;
  Endpoint endpoint;

  auto* sim = app.add_subcommand("sim", "run the robot headless, printing its state once per second");
  add_launch(sim, launch, start, rate);
  sim->add_option("--duration", duration, "stop after this many simulated seconds (0 = run until Ctrl-C)");

  auto* serve = app.add_subcommand("serve", "run the robot behind the WebSocket bridge");
  add_launch(serve, launch, start, rate);
  serve->add_option("--port", endpoint.port, "listen port (0 picks a free one)");
  serve->add_option("--address", endpoint.host, "listen address");

  auto* teleop = app.add_subcommand("teleop", "drive a served robot from the keyboard");
  add_endpoint(teleop, endpoint);

  std::string map_file;
  auto* saver = app.add_subcommand("map-saver", "save the map of a served mapping session");
  saver->add_option("-f", map_file, "output basename (writes <name>.pgm and <name>.yaml)");
  add_endpoint(saver, endpoint);

  std::vector<std::string> nav_args;
  bool nav_local = false;
  double nav_timeout = 600.0;
  auto* navigate = app.add_subcommand("navigate", "send a goal <x> metres ahead with heading quaternion <w>");
  navigate->add_option("args", nav_args, "<x> <w>")->expected(0, 2);
  navigate->add_flag("--local", nav_local, "run an in-process navigation stack in the demo world");
  navigate->add_option("--timeout", nav_timeout, "give up after this many simulated seconds");
  add_endpoint(navigate, endpoint);
  std::string nav_start;
  navigate->add_option("--start", nav_start, "start pose for --local");
  std::uint64_t nav_seed = 1;
  navigate->add_option("--seed", nav_seed, "random seed for --local");

  std::string pairs = "default";
  BenchmarkOptions bench;
  auto* benchmark = app.add_subcommand("benchmark", "time-to-goal over (min_vel_x, max_vel_x) pairs");
  benchmark->add_option("--pairs", pairs, "min:max,min:max,... or 'default' for the six standard pairs");
  benchmark->add_option("--seed", bench.seed, "random seed");
  benchmark->add_option("--course", bench.course, "course id");
  benchmark->add_option("--resolution", bench.resolution, "world resolution in m/cell")
      ->check(CLI::PositiveNumber);
  benchmark->add_option("--timeout", bench.timeout, "simulated seconds before a run counts as a timeout");

  auto* config = app.add_subcommand("config", "print every option in config file format");

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  try {
    StackOptions opts;
    if (!config_path.empty()) opts = load_config(config_path);
    launch.stack = opts;
    bench.stack = opts;

    if (*sim) return run_sim(launch, start, rate, duration);
    if (*serve) return run_serve(launch, start, rate, endpoint);
    if (*teleop) return run_teleop_cmd(endpoint);
    if (*saver) return cli::run_map_saver(map_file, endpoint.host, endpoint.port, std::cout, std::cerr);
    if (*navigate) {
      if (nav_local) {
        cli::LaunchOptions lo;
        lo.stack = opts;
        lo.seed = nav_seed;
        if (!nav_start.empty()) lo.start = cli::parse_pose(nav_start);
        const OccupancyGrid world = make_demo_world(lo.resolution);
        Stack stack(world, lo.start.value_or(demo_course().start), lo.seed, lo.stack, world);
        cli::LocalGoalClient client(stack);
        return cli::run_navigate(nav_args, client, std::cout, std::cerr, nav_timeout);
      }
      cli::BridgeGoalClient client(endpoint.host, endpoint.port);
      return cli::run_navigate(nav_args, client, std::cout, std::cerr, nav_timeout);
    }
    if (*benchmark) return run_benchmark_cmd(pairs, bench);
    if (*config) {
      std::cout << dump_config(opts);
      return cli::kExitOk;
    }
  } catch (const cli::UsageError& e) {
    std::cerr << "minibot: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "minibot: " << e.what() << "\n";
    return cli::kExitFailed;
  }
  return cli::kExitOk;
}
