#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "airdraw/stream_session.hpp"

namespace airdraw {

/// WebSocket front end for StreamSession.
///
///   GET /v1/health   template completeness as JSON
///   WS  /v1/stream   one StreamSession per connection
///
/// Each connection runs on its own thread and handles frames strictly in
/// order; replies for a frame are written before the next frame is read.
class StreamServer {
 public:
  StreamServer(ServiceConfig config, std::shared_ptr<TemplateStore> store);
  ~StreamServer();

  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  /// Binds and starts accepting. Port 0 picks a free port; the bound port is
  /// returned.
  std::uint16_t start(const std::string& address, std::uint16_t port);

  /// Stops accepting, shuts down open connections and joins all threads.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace airdraw
