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

#ifndef MINIBOT_BRIDGE_CLIENT_HPP_
#define MINIBOT_BRIDGE_CLIENT_HPP_

// Blocking /ws client with per-call timeouts, used by the CLI (navigate,
// teleop, map-saver against a running `serve`) and by the tests. A timeout
// cancels the socket, so after one the client must reconnect.

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "minibot/bridge/protocol.hpp"

namespace minibot::bridge {

class Client {
 public:
  using Duration = std::chrono::steady_clock::duration;

  Client() : ws_(ioc_) {}

  // Throws std::runtime_error when the server cannot be reached in time.
  void connect(const std::string& host, unsigned short port,
               Duration timeout = std::chrono::seconds(5)) {
    namespace asio = boost::asio;
    asio::ip::tcp::resolver resolver(ioc_);
    const auto results = resolver.resolve(host, std::to_string(port));
    boost::beast::error_code ec = boost::asio::error::would_block;
    boost::beast::get_lowest_layer(ws_).async_connect(
        results, [&](boost::beast::error_code e, const auto&) { ec = e; });
    run(timeout, ec);
    if (ec) throw std::runtime_error("cannot connect to " + host + ":" + std::to_string(port) + ": " + ec.message());
    ec = boost::asio::error::would_block;
    ws_.async_handshake(host + ":" + std::to_string(port), "/ws", [&](boost::beast::error_code e) { ec = e; });
    run(timeout, ec);
    if (ec) throw std::runtime_error("websocket handshake failed: " + ec.message());
  }

  void send(const json& msg, Duration timeout = std::chrono::seconds(5)) {
    const std::string text = msg.dump();
    boost::beast::error_code ec = boost::asio::error::would_block;
    ws_.text(true);
    ws_.async_write(boost::asio::buffer(text), [&](boost::beast::error_code e, std::size_t) { ec = e; });
    run(timeout, ec);
    if (ec) throw std::runtime_error("send failed: " + ec.message());
  }

  // Next message from the server, or nullopt on timeout.
  std::optional<json> receive(Duration timeout = std::chrono::seconds(5)) {
    boost::beast::error_code ec = boost::asio::error::would_block;
    buffer_.consume(buffer_.size());
    ws_.async_read(buffer_, [&](boost::beast::error_code e, std::size_t) { ec = e; });
    run(timeout, ec);
    if (ec == boost::asio::error::timed_out) return std::nullopt;
    if (ec) throw std::runtime_error("receive failed: " + ec.message());
    return json::parse(boost::beast::buffers_to_string(buffer_.data()));
  }

  // Reads until a message of `type` arrives (others are skipped) or the
  // deadline passes.
  std::optional<json> receive_type(const std::string& type, Duration timeout = std::chrono::seconds(5)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = deadline - std::chrono::steady_clock::now();
      if (left <= Duration::zero()) return std::nullopt;
      auto msg = receive(left);
      if (!msg) return std::nullopt;
      if (msg->value("type", std::string()) == type) return msg;
    }
  }

  // Sends a command and waits for its ack, skipping snapshots.
  json request(json msg, Duration timeout = std::chrono::seconds(5)) {
    msg["id"] = ++next_id_;
    send(msg, timeout);
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = deadline - std::chrono::steady_clock::now();
      auto ack = receive_type("ack", left > Duration::zero() ? left : Duration::zero());
      if (!ack) throw std::runtime_error("no ack from server");
      if ((*ack)["id"] == msg["id"]) return *ack;
    }
  }

  void close() {
    boost::beast::error_code ec;
    boost::beast::get_lowest_layer(ws_).socket().close(ec);
  }

 private:
  // Runs the io_context until `ec` leaves would_block or the timeout hits;
  // on timeout the socket is cancelled and `ec` becomes timed_out.
  void run(Duration timeout, boost::beast::error_code& ec) {
    ioc_.restart();
    ioc_.run_for(timeout);
    if (ec == boost::asio::error::would_block) {
      boost::beast::get_lowest_layer(ws_).socket().cancel();
      ioc_.restart();
      ioc_.run();
      ec = boost::asio::error::timed_out;
    }
  }

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
  boost::beast::flat_buffer buffer_;
  int next_id_ = 0;
};

// GET over plain HTTP; returns the body. Throws on transport errors or a
// non-200 status.
inline std::string http_get(const std::string& host, unsigned short port, const std::string& target) {
  namespace asio = boost::asio;
  namespace beast = boost::beast;
  namespace http = beast::http;
  asio::io_context ioc;
  asio::ip::tcp::resolver resolver(ioc);
  beast::tcp_stream stream(ioc);
  stream.expires_after(std::chrono::seconds(5));
  stream.connect(resolver.resolve(host, std::to_string(port)));
  http::request<http::empty_body> req(http::verb::get, target, 11);
  req.set(http::field::host, host);
  http::write(stream, req);
  beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  beast::error_code ec;
  stream.socket().shutdown(asio::ip::tcp::socket::shutdown_both, ec);
  if (res.result() != http::status::ok) {
    throw std::runtime_error("GET " + target + " returned " + std::to_string(res.result_int()));
  }
  return res.body();
}

}  // namespace minibot::bridge

#endif  // MINIBOT_BRIDGE_CLIENT_HPP_
