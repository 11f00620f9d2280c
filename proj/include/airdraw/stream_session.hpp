#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "airdraw/classifier.hpp"
#include "airdraw/pipeline.hpp"
#include "airdraw/synth.hpp"

namespace airdraw {

// Wire protocol, one JSON object per WebSocket text frame, "v": 1.
//
// Client -> server
//   {"v":1,"kind":"stroke_point","t_ms":12.5,"pen":"down","x":0.4,"y":0.7}
//   {"v":1,"kind":"stroke_point","t_ms":30.0,"pen":"up"}      dwell marker
//   {"v":1,"kind":"raw_sample","t_us":1000,"la":[x,y,z],"g":[x,y,z]}
//   {"v":1,"kind":"begin_template","letter":"a"}
//   {"v":1,"kind":"set_config","size_in":6,"theta_deg":0,"mode":"write"}
//
// Server -> client
//   {"v":1,"kind":"session_start","t_us":...}
//   {"v":1,"kind":"session_end","t_us":...,"t_start_us":...,"n_samples":...}
//   {"v":1,"kind":"prediction","letter":"a","ranked":[{"letter":"a","distance":...},...]}
//   {"v":1,"kind":"template_saved","letter":"a","trained":n,"missing":[...]}
//   {"v":1,"kind":"error","code":"...","message":"...", ...}
//
// Pad coordinates are in [0,1]^2 with y growing downward. While the pen is
// up the client keeps sending dwell markers so the server sees time pass.

inline constexpr int kProtocolVersion = 1;

/// Shared template store. Readers take an immutable snapshot; commits copy,
/// train and swap the pointer under a lock, optionally persisting the file.
class TemplateStore {
 public:
  explicit TemplateStore(TemplateSet initial,
                         std::optional<std::filesystem::path> persist_path = std::nullopt);

  std::shared_ptr<const TemplateSet> snapshot() const;
  std::shared_ptr<const TemplateSet> commit(const Label& letter, TraceMatrix trace);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const TemplateSet> current_;
  std::optional<std::filesystem::path> persist_path_;
};

struct ServiceConfig {
  PipelineConfig pipeline;
  double letter_size_m = 0.3048;
  double theta_rad = 0.0;
  /// Sustained client message rate before the connection is closed with a
  /// "rate" error; the same number is the burst allowance.
  double max_messages_per_s = 10000.0;
  /// Pen-up markers are held this long waiting for the next pen-down, which
  /// is then reached by a smoothstep transit instead of a jump. Past this the
  /// hand is treated as at rest.
  double pen_up_transit_ms = 1000.0;
};

nlohmann::ordered_json health_json(const TemplateSet& set);

/// One connection's pipeline state. Not thread-safe; the server drives each
/// session from a single thread in message order.
class StreamSession {
 public:
  StreamSession(ServiceConfig config, std::shared_ptr<TemplateStore> store);

  struct Reply {
    std::vector<nlohmann::ordered_json> messages;
    bool close = false;
  };

  /// Parses and handles one frame. Malformed frames produce an error message
  /// and close = true.
  Reply handle(std::string_view frame);
  Reply handle_json(const nlohmann::json& message);

  /// Builds the error frame used for transport-level failures (e.g. rate).
  static nlohmann::ordered_json error_message(std::string_view code, std::string_view message);

 private:
  struct PadPoint {
    double t_s = 0.0;
    Point2 pad;  // pad coordinates
  };

  void on_stroke_point(const nlohmann::json& msg, Reply& reply);
  void on_raw_sample(const nlohmann::json& msg, Reply& reply);
  void on_begin_template(const nlohmann::json& msg, Reply& reply);
  void on_set_config(const nlohmann::json& msg, Reply& reply);

  void push_pad_point(const PadPoint& p, Reply& reply);
  void flush_held(Reply& reply);
  void feed(const SensorSample& sample, Reply& reply);
  void on_session_end(const SessionEvent& end, Reply& reply);
  void check_time(TimestampUs t_us);

  ServiceConfig config_;
  std::shared_ptr<TemplateStore> store_;
  WearStage wear_;
  std::optional<Label> pending_template_;
  std::size_t session_index_ = 0;
  std::optional<TimestampUs> last_t_us_;

  // Pointer-to-acceleration conversion.
  std::vector<PadPoint> window_;      // up to the last three positions
  std::vector<double> held_ticks_s_;  // pen-up markers awaiting the next pen-down
  bool pen_down_ = false;
  std::optional<PadPoint> last_pen_down_;
};

/// Client-side helper used by tests and the fixture generator: replays a
/// stroke path as pointer messages at `rate_hz` (with timing jitter from
/// `seed`), pen-up markers during transits, and `tail_ms` of dwell markers
/// after the letter. Times start at t0_ms.
std::vector<nlohmann::ordered_json> pad_recording(const StrokePath& path, double mean_letter_s,
                                                  double rate_hz, std::uint64_t seed,
                                                  double t0_ms = 0.0, double tail_ms = 1500.0);

}  // namespace airdraw
