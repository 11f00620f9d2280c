#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "airdraw/sensor_model.hpp"

namespace airdraw {

struct SessionConfig {
  double threshold = 1.0;  // m/s^2, compared against |linear_accel|
  double hold_ms = 400.0;  // quiet time that closes a session

  void validate() const;
};

enum class SessionState { Idle, Active };

enum class SessionEventKind { Start, End };

struct SessionEvent {
  SessionEventKind kind = SessionEventKind::Start;
  TimestampUs t_us = 0;
  /// End only: samples from the start sample through the last sample above
  /// threshold. The quiet tail is not included.
  std::vector<SensorSample> trace;
};

/// Segments a sample stream into writing sessions.
///
/// Idle -> Active when |linear_accel| > threshold; that sample opens the
/// session. Active -> Idle on the first sample whose timestamp is more than
/// hold_ms after the last above-threshold sample; the End event carries that
/// sample's timestamp. Shorter dips keep the session open, so pauses between
/// strokes of one letter do not split it.
class SessionDetector {
 public:
  explicit SessionDetector(SessionConfig config = {});

  /// Throws Error(Stream) if the timestamp does not strictly increase.
  std::optional<SessionEvent> feed(const SensorSample& sample);

  /// Closes an open session at end of stream. The End timestamp is the last
  /// sample seen. Returns nothing when idle.
  std::optional<SessionEvent> flush();

  SessionState state() const { return state_; }
  const SessionConfig& config() const { return config_; }
  /// Timestamp of the first sub-threshold sample of the current quiet run,
  /// present only while Active and quiet.
  std::optional<TimestampUs> below_since() const { return below_since_; }

 private:
  SessionEvent close(TimestampUs t_us);

  SessionConfig config_;
  SessionState state_ = SessionState::Idle;
  std::optional<TimestampUs> last_t_;
  std::optional<TimestampUs> below_since_;
  TimestampUs last_above_t_ = 0;
  std::size_t last_above_index_ = 0;
  std::vector<SensorSample> buffer_;
};

/// Samples a continuous link would send versus samples sent while a session
/// is active.
struct TransferLedger {
  std::int64_t continuous_count = 0;
  std::int64_t gated_count = 0;
};

/// Ledger for a fully consumed stream of `total_samples` samples whose
/// session End events are given (Start events are ignored).
TransferLedger account(std::span<const SessionEvent> events, std::int64_t total_samples);

/// Runs a detector over the trace (flushing at the end) and accounts for it.
TransferLedger account_trace(std::span<const SensorSample> trace, const SessionConfig& config);

/// 100 * (continuous - gated) / continuous. Throws Error(UndefinedSavings)
/// when continuous is not positive.
double savings(double continuous, double gated);
double savings(const TransferLedger& ledger);

/// Feeds a whole trace and collects events, flushing an open session.
std::vector<SessionEvent> detect_sessions(std::span<const SensorSample> trace,
                                          const SessionConfig& config);

}  // namespace airdraw
