#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "airdraw/classifier.hpp"
#include "airdraw/orientation.hpp"
#include "airdraw/sensor_model.hpp"
#include "airdraw/session.hpp"

namespace airdraw {

struct PipelineConfig {
  FilterSpec filter;
  SessionConfig session;
  DtwOptions dtw;
  AngleMode angle_mode = AngleMode::PerSample;
  std::optional<std::filesystem::path> templates;

  void validate() const;
};

/// Parses the TOML-style config:
///
///   [filter]       weights = [1, 2, 3, 4, 5]     positive, 1..64 entries
///   [session]      threshold = 1.0               m/s^2, (0, 100]
///                  hold_ms = 400                 (0, 10000]
///   [orientation]  angle_mode = "per_sample"     or "per_session"
///   [dtw]          band_fraction = 0.1           [0, 1]; omit for none
///   [io]           templates = "templates.json"
///
/// '#' starts a comment. Unknown sections or keys, duplicate keys and values
/// out of range raise Error(Configuration) naming the line.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Wear side: smoothing and session gating. Only samples inside sessions
/// cross to the mobile side; the ledger counts what would have crossed with
/// a continuous link.
class WearStage {
 public:
  explicit WearStage(const PipelineConfig& config);

  std::optional<SessionEvent> push(const SensorSample& raw);
  std::optional<SessionEvent> finish();

  const TransferLedger& ledger() const { return ledger_; }
  SessionState state() const { return detector_.state(); }

 private:
  void count(const std::optional<SessionEvent>& ev);

  StreamSmoother smoother_;
  SessionDetector detector_;
  TransferLedger ledger_;
};

struct SessionResult {
  std::size_t index = 0;
  TimestampUs t_start_us = 0;  // first sample of the session
  TimestampUs t_last_us = 0;   // last above-threshold sample
  TimestampUs t_end_us = 0;    // End event time
  std::vector<RotatedSample> rotated;
  std::optional<Prediction> prediction;
  std::optional<std::string> note;
};

/// Mobile side: frame rotation and classification of a closed session.
class MobileStage {
 public:
  /// `templates` may be null, in which case sessions are rotated but not
  /// classified.
  MobileStage(const PipelineConfig& config, std::shared_ptr<const TemplateSet> templates);

  /// `end` must be an End event. Throws Error(NotTrained) when templates are
  /// present but incomplete.
  SessionResult process(const SessionEvent& end, std::size_t index) const;

 private:
  AngleMode angle_mode_;
  DtwOptions dtw_;
  std::shared_ptr<const TemplateSet> templates_;
};

struct PipelineRun {
  std::vector<SessionResult> sessions;
  TransferLedger ledger;
  std::vector<QualityWarning> warnings;
};

PipelineRun run_pipeline(std::span<const SensorSample> raw, const PipelineConfig& config,
                         std::shared_ptr<const TemplateSet> templates = nullptr);

/// One JSONL record per session. Keys are emitted in a fixed order.
nlohmann::ordered_json to_json(const SessionResult& result);

}  // namespace airdraw
