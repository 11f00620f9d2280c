#include "airdraw/pipeline.hpp"

#include "airdraw/error.hpp"

namespace airdraw {

WearStage::WearStage(const PipelineConfig& config)
    : smoother_(config.filter), detector_(config.session) {}

std::optional<SessionEvent> WearStage::push(const SensorSample& raw) {
  ++ledger_.continuous_count;
  auto ev = detector_.feed(smoother_.push(raw));
  count(ev);
  return ev;
}

std::optional<SessionEvent> WearStage::finish() {
  auto ev = detector_.flush();
  count(ev);
  return ev;
}

void WearStage::count(const std::optional<SessionEvent>& ev) {
  if (ev && ev->kind == SessionEventKind::End) {
    ledger_.gated_count += static_cast<std::int64_t>(ev->trace.size());
  }
}

MobileStage::MobileStage(const PipelineConfig& config, std::shared_ptr<const TemplateSet> templates)
    : angle_mode_(config.angle_mode), dtw_(config.dtw), templates_(std::move(templates)) {}

SessionResult MobileStage::process(const SessionEvent& end, std::size_t index) const {
  SessionResult r;
  r.index = index;
  r.t_end_us = end.t_us;
  if (end.trace.empty()) {
    r.note = "empty";
    return r;
  }
  r.t_start_us = end.trace.front().t_us;
  r.t_last_us = end.trace.back().t_us;
  try {
    r.rotated = rotate_trace(end.trace, angle_mode_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::IndeterminateAngle) throw;
    r.note = "indeterminate_angle";
    return r;
  }
  if (!templates_) return r;
  if (r.rotated.size() < 2) {
    r.note = "too_short";
    return r;
  }
  r.prediction = classify(*templates_, TraceMatrix::from_rotated(r.rotated), dtw_);
  return r;
}

PipelineRun run_pipeline(std::span<const SensorSample> raw, const PipelineConfig& config,
                         std::shared_ptr<const TemplateSet> templates) {
  config.validate();
  validate_stream(raw);
  if (templates && !templates->complete()) {
    std::string msg = "template set incomplete, missing:";
    for (const auto& l : templates->missing()) msg += " " + l;
    throw Error(ErrorCode::NotTrained, msg);
  }
  WearStage wear(config);
  const MobileStage mobile(config, std::move(templates));
  PipelineRun run;
  auto handle = [&](const std::optional<SessionEvent>& ev) {
    if (ev && ev->kind == SessionEventKind::End) {
      run.sessions.push_back(mobile.process(*ev, run.sessions.size()));
    }
  };
  for (const auto& s : raw) handle(wear.push(s));
  handle(wear.finish());
  run.ledger = wear.ledger();
  run.warnings = gravity_quality(raw);
  return run;
}

nlohmann::ordered_json to_json(const SessionResult& result) {
  using nlohmann::ordered_json;
  ordered_json rotated = ordered_json::object();
  std::vector<TimestampUs> t;
  std::vector<double> x, y, z;
  for (const auto& s : result.rotated) {
    t.push_back(s.t_us);
    x.push_back(s.accel.x);
    y.push_back(s.accel.y);
    z.push_back(s.accel.z);
  }
  rotated["t_us"] = t;
  rotated["x"] = x;
  rotated["y"] = y;
  rotated["z"] = z;

  ordered_json doc;
  doc["session"] = result.index;
  doc["t_start_us"] = result.t_start_us;
  doc["t_last_us"] = result.t_last_us;
  doc["t_end_us"] = result.t_end_us;
  doc["n_samples"] = result.rotated.size();
  doc["rotated"] = rotated;
  if (result.prediction) {
    ordered_json ranked = ordered_json::array();
    for (const auto& r : result.prediction->ranked) {
      ranked.push_back(ordered_json{{"letter", r.label}, {"distance", r.distance}});
    }
    doc["prediction"] = ordered_json{{"letter", result.prediction->letter}, {"ranked", ranked}};
  } else {
    doc["prediction"] = nullptr;
  }
  if (result.note) doc["note"] = *result.note;
  return doc;
}

}  // namespace airdraw
