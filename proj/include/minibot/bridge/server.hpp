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

#ifndef MINIBOT_BRIDGE_SERVER_HPP_
#define MINIBOT_BRIDGE_SERVER_HPP_

// WebSocket bridge. One network thread serves every client; the simulation
// runs on its own thread (SimLoop) and hands over immutable snapshots. Each
// client keeps at most one pending snapshot (a newer one replaces it), while
// acks queue without limit, so a slow reader can lose snapshots but never an
// answer to its own command.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <utility>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "minibot/bridge/protocol.hpp"
#include "minibot/stack.hpp"

namespace minibot::bridge {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

// Ticks a Stack at a fixed rate on its own thread and reports a snapshot
// after every tick. `speedup` scales sim time against wall time; 0 runs as
// fast as possible.
class SimLoop {
 public:
  using Listener = std::function<void(std::shared_ptr<const Snapshot>)>;

  SimLoop(Stack& stack, double speedup = 1.0) : stack_(stack), speedup_(speedup) {}
  ~SimLoop() { stop(); }
  SimLoop(const SimLoop&) = delete;
  SimLoop& operator=(const SimLoop&) = delete;

  void start(Listener listener) {
    stop();
    running_ = true;
    thread_ = std::thread([this, l = std::move(listener)] { run(l); });
  }

  void stop() {
    running_ = false;
    if (thread_.joinable()) thread_.join();
  }

  // Runs `fn` on the simulation thread between ticks and waits for it, for
  // callers that need a consistent read of the stack (e.g. saving the map).
  template <class Fn>
  auto with_stack(Fn fn) {
    std::unique_lock<std::mutex> lock(mu_);
    return fn(stack_);
  }

 private:
  void run(const Listener& listener) {
    using clock = std::chrono::steady_clock;
    const auto period = std::chrono::duration<double>(stack_.sim().dt() / (speedup_ > 0 ? speedup_ : 1.0));
    auto next = clock::now();
    while (running_) {
      std::shared_ptr<const Snapshot> snap;
      {
        std::lock_guard<std::mutex> lock(mu_);
        stack_.step();
        snap = std::make_shared<const Snapshot>(stack_.snapshot());
      }
      listener(std::move(snap));
      if (speedup_ > 0) {
        next += std::chrono::duration_cast<clock::duration>(period);
        std::this_thread::sleep_until(next);
      }
    }
  }

  Stack& stack_;
  double speedup_;
  std::mutex mu_;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

struct ServerOptions {
  unsigned short port = 8765;  // 0 picks a free port
  std::string address = "127.0.0.1";
  int scan_stride = 2;  // beams per transmitted range
};

class Server {
 public:
  using CommandHandler = std::function<json(std::string_view)>;

  // `on_command` turns one client frame into an ack (normally
  // handle_command against the running stack).
  Server(ServerOptions opts, CommandHandler on_command)
      : opts_(std::move(opts)), on_command_(std::move(on_command)), acceptor_(ioc_) {}
  ~Server() { stop(); }
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  void start() {
    const tcp::endpoint ep(asio::ip::make_address(opts_.address), opts_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(asio::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
    port_ = acceptor_.local_endpoint().port();
    accept();
    thread_ = std::thread([this] { ioc_.run(); });
  }

  void stop() {
    if (!thread_.joinable()) return;
    ioc_.stop();
    thread_.join();
    // The network thread is gone, so its state can be torn down here.
    beast::error_code ec;
    acceptor_.close(ec);
    for (const auto& s : sessions_) s->close();
    sessions_.clear();
    clients_ = 0;
  }

  unsigned short port() const { return port_; }

  // Thread-safe; called by the simulation loop.
  void publish(std::shared_ptr<const Snapshot> snap) {
    asio::post(ioc_, [this, snap = std::move(snap)] {
      for (const auto& s : sessions_) s->offer_snapshot(snap);
    });
  }

  std::size_t client_count() const { return clients_.load(); }

 private:
  class Session : public std::enable_shared_from_this<Session> {
   public:
    Session(tcp::socket socket, Server& server) : ws_(std::move(socket)), server_(server) {}

    void run(http::request<http::string_body> req) {
      ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
      ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
        if (ec) return;
        self->server_.sessions_.insert(self);
        ++self->server_.clients_;
        self->acks_.push_back(hello_json().dump());
        self->flush();
        self->read();
      });
    }

    void offer_snapshot(std::shared_ptr<const Snapshot> snap) {
      pending_ = std::move(snap);  // drop-oldest: only the newest waits
      flush();
    }

    void close() {
      beast::error_code ec;
      beast::get_lowest_layer(ws_).socket().close(ec);
    }

   private:
    void read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return self->drop();
        const std::string text = beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        self->acks_.push_back(self->server_.on_command_(text).dump());
        self->flush();
        self->read();
      });
    }

    void flush() {
      if (writing_ || closed_) return;
      std::string text;
      if (!acks_.empty()) {
        text = std::move(acks_.front());
        acks_.pop_front();
      } else if (pending_) {
        std::shared_ptr<const Snapshot> snap = std::move(pending_);
        pending_.reset();
        if (last_seq_ && snap->seq <= *last_seq_) return flush();
        last_seq_ = snap->seq;
        try {
          text = delta_.encode(*snap, server_.opts_.scan_stride);
        } catch (const std::exception& e) {
          std::cerr << "[bridge] snapshot serialization failed: " << e.what() << "\n";
          return;
        }
      } else {
        return;
      }
      writing_ = true;
      out_ = std::move(text);
      ws_.text(true);
      ws_.async_write(asio::buffer(out_), [self = shared_from_this()](beast::error_code ec, std::size_t) {
        self->writing_ = false;
        if (ec) return self->drop();
        self->flush();
      });
    }

    void drop() {
      if (closed_) return;
      closed_ = true;
      if (server_.sessions_.erase(shared_from_this()) > 0) --server_.clients_;
    }

    websocket::stream<beast::tcp_stream> ws_;
    Server& server_;
    beast::flat_buffer buffer_;
    std::deque<std::string> acks_;
    std::shared_ptr<const Snapshot> pending_;
    std::optional<std::uint64_t> last_seq_;
    MapDelta delta_;
    std::string out_;
    bool writing_ = false;
    bool closed_ = false;
  };

  // Plain HTTP until the request is known: /ws upgrades, /keymap.json is
  // served directly, anything else is 404.
  class HttpSession : public std::enable_shared_from_this<HttpSession> {
   public:
    HttpSession(tcp::socket socket, Server& server) : stream_(std::move(socket)), server_(server) {}

    void run() {
      stream_.expires_after(std::chrono::seconds(10));
      http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) return;
        self->route();
      });
    }

   private:
    void route() {
      stream_.expires_never();
      if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
        std::make_shared<Session>(stream_.release_socket(), server_)->run(std::move(req_));
        return;
      }
      auto res = std::make_shared<http::response<http::string_body>>();
      res->version(req_.version());
      res->keep_alive(false);
      if (req_.method() == http::verb::get && req_.target() == "/keymap.json") {
        res->result(http::status::ok);
        res->set(http::field::content_type, "application/json");
        res->body() = keymap_json().dump(2) + "\n";
      } else {
        res->result(http::status::not_found);
        res->set(http::field::content_type, "text/plain");
        res->body() = "not found\n";
      }
      res->prepare_payload();
      http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
        beast::error_code ec;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      });
    }

    beast::tcp_stream stream_;
    Server& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
  };

  void accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<HttpSession>(std::move(socket), *this)->run();
      accept();
    });
  }

  ServerOptions opts_;
  CommandHandler on_command_;
  asio::io_context ioc_;
  tcp::acceptor acceptor_;
  std::thread thread_;
  unsigned short port_ = 0;
  std::set<std::shared_ptr<Session>> sessions_;  // network thread only
  std::atomic<std::size_t> clients_{0};
};

}  // namespace minibot::bridge

#endif  // MINIBOT_BRIDGE_SERVER_HPP_
