#include "airdraw/session.hpp"

#include <cmath>
#include <string>

#include "airdraw/error.hpp"

namespace airdraw {

void SessionConfig::validate() const {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw Error(ErrorCode::Configuration, "session threshold must be positive");
  }
  if (!(hold_ms > 0.0) || !std::isfinite(hold_ms)) {
    throw Error(ErrorCode::Configuration, "session hold_ms must be positive");
  }
}

SessionDetector::SessionDetector(SessionConfig config) : config_(config) { config_.validate(); }

std::optional<SessionEvent> SessionDetector::feed(const SensorSample& sample) {
  if (last_t_ && sample.t_us <= *last_t_) {
    throw Error(ErrorCode::Stream, "out-of-order timestamp " + std::to_string(sample.t_us) +
                                       " after " + std::to_string(*last_t_));
  }
  last_t_ = sample.t_us;
  const bool above = norm(sample.linear_accel) > config_.threshold;

  if (state_ == SessionState::Idle) {
    if (!above) return std::nullopt;
    state_ = SessionState::Active;
    buffer_.assign(1, sample);
    last_above_t_ = sample.t_us;
    last_above_index_ = 0;
    return SessionEvent{SessionEventKind::Start, sample.t_us, {}};
  }

  if (above) {
    buffer_.push_back(sample);
    last_above_t_ = sample.t_us;
    last_above_index_ = buffer_.size() - 1;
    below_since_.reset();
    return std::nullopt;
  }

  const double quiet_ms = static_cast<double>(sample.t_us - last_above_t_) / 1000.0;
  if (quiet_ms > config_.hold_ms) return close(sample.t_us);

  if (!below_since_) below_since_ = sample.t_us;
  buffer_.push_back(sample);
  return std::nullopt;
}

std::optional<SessionEvent> SessionDetector::flush() {
  if (state_ == SessionState::Idle) return std::nullopt;
  return close(*last_t_);
}

SessionEvent SessionDetector::close(TimestampUs t_us) {
  buffer_.resize(last_above_index_ + 1);
  SessionEvent ev{SessionEventKind::End, t_us, std::move(buffer_)};
  buffer_.clear();
  state_ = SessionState::Idle;
  below_since_.reset();
  return ev;
}

std::vector<SessionEvent> detect_sessions(std::span<const SensorSample> trace,
                                          const SessionConfig& config) {
  SessionDetector detector(config);
  std::vector<SessionEvent> events;
  for (const auto& s : trace) {
    if (auto ev = detector.feed(s)) events.push_back(std::move(*ev));
  }
  if (auto ev = detector.flush()) events.push_back(std::move(*ev));
  return events;
}

TransferLedger account(std::span<const SessionEvent> events, std::int64_t total_samples) {
  TransferLedger ledger{total_samples, 0};
  for (const auto& ev : events) {
    if (ev.kind == SessionEventKind::End) {
      ledger.gated_count += static_cast<std::int64_t>(ev.trace.size());
    }
  }
  return ledger;
}

TransferLedger account_trace(std::span<const SensorSample> trace, const SessionConfig& config) {
  const auto events = detect_sessions(trace, config);
  return account(events, static_cast<std::int64_t>(trace.size()));
}

double savings(double continuous, double gated) {
  if (!(continuous > 0.0)) {
    throw Error(ErrorCode::UndefinedSavings, "savings undefined for zero continuous transfers");
  }
  return 100.0 * (continuous - gated) / continuous;
}

double savings(const TransferLedger& ledger) {
  return savings(static_cast<double>(ledger.continuous_count),
                 static_cast<double>(ledger.gated_count));
}

}  // namespace airdraw
