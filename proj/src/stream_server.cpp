#include "airdraw/stream_server.hpp"

#include <sys/socket.h>

#include <atomic>
#include <chrono>
#include <iostream>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace airdraw {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

/// Token bucket over client frames.
class RateGuard {
 public:
  explicit RateGuard(double per_second)
      : rate_(per_second), tokens_(per_second), last_(std::chrono::steady_clock::now()) {}

  bool admit() {
    const auto now = std::chrono::steady_clock::now();
    tokens_ = std::min(rate_, tokens_ + rate_ * std::chrono::duration<double>(now - last_).count());
    last_ = now;
    if (tokens_ < 1.0) return false;
    tokens_ -= 1.0;
    return true;
  }

 private:
  double rate_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

}  // namespace

struct StreamServer::Impl {
  ServiceConfig config;
  std::shared_ptr<TemplateStore> store;
  asio::io_context ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread accept_thread;
  std::atomic<bool> stopping{false};

  struct Connection {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };

  std::mutex mutex;
  std::vector<Connection> connections;
  std::set<int> open_fds;

  /// Joins connection threads that have finished. Caller holds the mutex.
  void reap() {
    std::erase_if(connections, [](Connection& c) {
      if (!c.done->load()) return false;
      c.thread.join();
      return true;
    });
  }

  void accept_loop() {
    while (!stopping) {
      beast::error_code ec;
      tcp::socket socket(ioc);
      acceptor->accept(socket, ec);
      if (ec || stopping) break;
      std::lock_guard lock(mutex);
      reap();
      const int fd = socket.native_handle();
      open_fds.insert(fd);
      auto done = std::make_shared<std::atomic<bool>>(false);
      std::thread worker([this, s = std::move(socket), fd, done]() mutable {
        serve(s);
        // Close under the lock so the fd cannot be reused by a new
        // connection while still registered.
        std::lock_guard l(mutex);
        open_fds.erase(fd);
        beast::error_code ignored;
        s.close(ignored);
        done->store(true);
      });
      connections.push_back({std::move(worker), std::move(done)});
    }
  }

  void serve(tcp::socket& socket) {
    beast::error_code ec;
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    http::read(socket, buffer, req, ec);
    if (ec) return;

    if (websocket::is_upgrade(req)) {
      if (req.target() != "/v1/stream") {
        respond(socket, req, http::status::not_found, R"({"error":"not found"})");
        return;
      }
      run_websocket(socket, req, std::move(buffer));
      return;
    }
    if (req.method() == http::verb::get && req.target() == "/v1/health") {
      respond(socket, req, http::status::ok, health_json(*store->snapshot()).dump());
      return;
    }
    respond(socket, req, http::status::not_found, R"({"error":"not found"})");
  }

  void respond(tcp::socket& socket, const http::request<http::string_body>& req, http::status status,
               std::string body) {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::content_type, "application/json");
    res.keep_alive(false);
    res.body() = std::move(body);
    res.prepare_payload();
    beast::error_code ec;
    http::write(socket, res, ec);
    socket.shutdown(tcp::socket::shutdown_send, ec);
  }

  void run_websocket(tcp::socket& socket, const http::request<http::string_body>& req,
                     beast::flat_buffer buffer) {
    websocket::stream<tcp::socket&> ws(socket);
    beast::error_code ec;
    ws.accept(req, ec);
    if (ec) return;
    ws.text(true);

    StreamSession session(config, store);
    RateGuard guard(config.max_messages_per_s);
    buffer.consume(buffer.size());
    while (!stopping) {
      ws.read(buffer, ec);
      if (ec) return;  // closed by peer or shut down
      const std::string frame = beast::buffers_to_string(buffer.data());
      buffer.consume(buffer.size());

      StreamSession::Reply reply;
      if (!guard.admit()) {
        reply.messages.push_back(
            StreamSession::error_message("rate", "client is sending faster than the service admits"));
        reply.close = true;
      } else {
        reply = session.handle(frame);
      }
      for (const auto& m : reply.messages) {
        ws.write(asio::buffer(m.dump()), ec);
        if (ec) return;
      }
      if (reply.close) {
        ws.close(websocket::close_code::policy_error, ec);
        return;
      }
    }
  }
};

StreamServer::StreamServer(ServiceConfig config, std::shared_ptr<TemplateStore> store)
    : impl_(std::make_unique<Impl>()) {
  impl_->config = std::move(config);
  impl_->store = std::move(store);
}

StreamServer::~StreamServer() { stop(); }

std::uint16_t StreamServer::start(const std::string& address, std::uint16_t port) {
  const tcp::endpoint endpoint(asio::ip::make_address(address), port);
  impl_->acceptor = std::make_unique<tcp::acceptor>(impl_->ioc);
  impl_->acceptor->open(endpoint.protocol());
  impl_->acceptor->set_option(asio::socket_base::reuse_address(true));
  impl_->acceptor->bind(endpoint);
  impl_->acceptor->listen();
  const auto bound = impl_->acceptor->local_endpoint().port();
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
  return bound;
}

void StreamServer::stop() {
  if (!impl_ || !impl_->acceptor || impl_->stopping.exchange(true)) return;
  // Unblock accept() and every blocking read with a shutdown on the fd.
  ::shutdown(impl_->acceptor->native_handle(), SHUT_RDWR);
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::vector<Impl::Connection> connections;
  {
    std::lock_guard lock(impl_->mutex);
    for (int fd : impl_->open_fds) ::shutdown(fd, SHUT_RDWR);
    connections.swap(impl_->connections);
  }
  for (auto& c : connections) c.thread.join();
  beast::error_code ec;
  impl_->acceptor->close(ec);
}

}  // namespace airdraw
