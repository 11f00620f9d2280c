#include "airdraw/stream_session.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "airdraw/error.hpp"

namespace airdraw {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json message(std::string_view kind) {
  ordered_json m;
  m["v"] = kProtocolVersion;
  m["kind"] = kind;
  return m;
}

/// Thrown for frames that violate the protocol; the connection closes.
struct BadMessage {
  std::string what;
};

double number_field(const json& msg, const char* key) {
  auto it = msg.find(key);
  if (it == msg.end() || !it->is_number()) throw BadMessage{std::string("\"") + key + "\" must be a number"};
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw BadMessage{std::string("\"") + key + "\" must be finite"};
  return v;
}

std::string string_field(const json& msg, const char* key) {
  auto it = msg.find(key);
  if (it == msg.end() || !it->is_string()) throw BadMessage{std::string("\"") + key + "\" must be a string"};
  return it->get<std::string>();
}

void allow_keys(const json& msg, std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : msg.items()) {
    bool known = key == "v" || key == "kind";
    for (const char* k : keys) known = known || key == k;
    if (!known) throw BadMessage{"unexpected field \"" + key + "\""};
  }
}

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

}  // namespace

TemplateStore::TemplateStore(TemplateSet initial, std::optional<std::filesystem::path> persist_path)
    : current_(std::make_shared<const TemplateSet>(std::move(initial))),
      persist_path_(std::move(persist_path)) {}

std::shared_ptr<const TemplateSet> TemplateStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::shared_ptr<const TemplateSet> TemplateStore::commit(const Label& letter, TraceMatrix trace) {
  std::lock_guard lock(mutex_);
  auto next = std::make_shared<const TemplateSet>(current_->train(letter, std::move(trace)));
  if (persist_path_) save_templates(*next, *persist_path_);
  current_ = next;
  return next;
}

ordered_json health_json(const TemplateSet& set) {
  ordered_json doc = message("health");
  doc.erase("kind");
  doc["status"] = "ok";
  doc["templates"] = {{"trained", set.size()},
                      {"total", set.alphabet().size()},
                      {"complete", set.complete()},
                      {"missing", set.missing()}};
  return doc;
}

StreamSession::StreamSession(ServiceConfig config, std::shared_ptr<TemplateStore> store)
    : config_(std::move(config)), store_(std::move(store)), wear_(config_.pipeline) {}

ordered_json StreamSession::error_message(std::string_view code, std::string_view text) {
  ordered_json m = message("error");
  m["code"] = code;
  m["message"] = text;
  return m;
}

StreamSession::Reply StreamSession::handle(std::string_view frame) {
  json msg;
  try {
    msg = json::parse(frame);
  } catch (const json::parse_error&) {
    Reply r;
    r.messages.push_back(error_message("bad_message", "frame is not valid JSON"));
    r.close = true;
    return r;
  }
  return handle_json(msg);
}

StreamSession::Reply StreamSession::handle_json(const json& msg) {
  Reply reply;
  try {
    if (!msg.is_object()) throw BadMessage{"frame must be a JSON object"};
    auto v = msg.find("v");
    if (v == msg.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
      throw BadMessage{"unsupported or missing protocol version"};
    }
    const std::string kind = string_field(msg, "kind");
    if (kind == "stroke_point") {
      on_stroke_point(msg, reply);
    } else if (kind == "raw_sample") {
      on_raw_sample(msg, reply);
    } else if (kind == "begin_template") {
      on_begin_template(msg, reply);
    } else if (kind == "set_config") {
      on_set_config(msg, reply);
    } else {
      throw BadMessage{"unknown kind \"" + kind + "\""};
    }
  } catch (const BadMessage& e) {
    reply.messages.push_back(error_message("bad_message", e.what));
    reply.close = true;
  } catch (const Error& e) {
    reply.messages.push_back(error_message(to_string(e.code()), e.what()));
    reply.close = true;
  }
  return reply;
}

void StreamSession::check_time(TimestampUs t_us) {
  if (last_t_us_ && t_us <= *last_t_us_) throw BadMessage{"timestamps must increase"};
  last_t_us_ = t_us;
}

void StreamSession::on_stroke_point(const json& msg, Reply& reply) {
  const double t_ms = number_field(msg, "t_ms");
  const std::string pen = string_field(msg, "pen");
  check_time(static_cast<TimestampUs>(std::llround(t_ms * 1000.0)));
  const double t_s = t_ms / 1000.0;

  if (pen == "up") {
    allow_keys(msg, {"t_ms", "pen", "x", "y"});
    pen_down_ = false;
    if (!last_pen_down_) return;  // no position yet
    if ((t_s - last_pen_down_->t_s) * 1000.0 <= config_.pen_up_transit_ms) {
      held_ticks_s_.push_back(t_s);
      return;
    }
    flush_held(reply);
    push_pad_point({t_s, last_pen_down_->pad}, reply);
    return;
  }
  if (pen != "down") throw BadMessage{"\"pen\" must be \"down\" or \"up\""};
  allow_keys(msg, {"t_ms", "pen", "x", "y"});
  const double x = number_field(msg, "x");
  const double y = number_field(msg, "y");
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) throw BadMessage{"pad coordinates must lie in [0,1]"};
  const Point2 pad{x, y};

  if (!held_ticks_s_.empty() && last_pen_down_) {
    // Pen-up transit from the lift point to this touch-down.
    const PadPoint from = *last_pen_down_;
    const double span = t_s - from.t_s;
    for (double tick : held_ticks_s_) {
      const double f = smoothstep((tick - from.t_s) / span);
      push_pad_point({tick, {from.pad.h + f * (pad.h - from.pad.h), from.pad.v + f * (pad.v - from.pad.v)}},
                     reply);
    }
    held_ticks_s_.clear();
  }
  pen_down_ = true;
  last_pen_down_ = PadPoint{t_s, pad};
  push_pad_point(*last_pen_down_, reply);
}

void StreamSession::flush_held(Reply& reply) {
  if (held_ticks_s_.empty() || !last_pen_down_) return;
  for (double tick : held_ticks_s_) push_pad_point({tick, last_pen_down_->pad}, reply);
  held_ticks_s_.clear();
}

void StreamSession::push_pad_point(const PadPoint& p, Reply& reply) {
  window_.push_back(p);
  const double s = std::sin(config_.theta_rad), c = std::cos(config_.theta_rad);
  const Vec3 gravity{-kStandardGravity * s, -kStandardGravity * c, 0.0};
  auto to_us = [](double t_s) { return static_cast<TimestampUs>(std::llround(t_s * 1e6)); };

  if (window_.size() == 1) {
    feed({to_us(p.t_s), {}, gravity}, reply);
    return;
  }
  if (window_.size() < 3) return;

  const PadPoint &a = window_[0], &b = window_[1], &d = window_[2];
  const double h1 = b.t_s - a.t_s, h2 = d.t_s - b.t_s;
  const double size = config_.letter_size_m;
  // Pad y grows downward; world vertical grows upward.
  auto second_diff = [&](double pa, double pb, double pd) {
    return 2.0 * ((pd - pb) / h2 - (pb - pa) / h1) / (h1 + h2);
  };
  const double a_h = size * second_diff(a.pad.h, b.pad.h, d.pad.h);
  const double a_v = -size * second_diff(a.pad.v, b.pad.v, d.pad.v);
  feed({to_us(b.t_s), {-a_v * s, a_v * c, a_h}, gravity}, reply);
  window_.erase(window_.begin());
}

void StreamSession::on_raw_sample(const json& msg, Reply& reply) {
  allow_keys(msg, {"t_us", "la", "g"});
  auto t = msg.find("t_us");
  if (t == msg.end() || !t->is_number_integer()) throw BadMessage{"\"t_us\" must be an integer"};
  auto vec = [&](const char* key) {
    auto it = msg.find(key);
    if (it == msg.end() || !it->is_array() || it->size() != 3) {
      throw BadMessage{std::string("\"") + key + "\" must be an array of 3 numbers"};
    }
    double v[3];
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(*it)[i].is_number()) throw BadMessage{std::string("\"") + key + "\" has a non-number"};
      v[i] = (*it)[i].get<double>();
      if (!std::isfinite(v[i])) throw BadMessage{std::string("\"") + key + "\" not finite"};
    }
    return Vec3{v[0], v[1], v[2]};
  };
  SensorSample sample{t->get<TimestampUs>(), vec("la"), vec("g")};
  flush_held(reply);
  check_time(sample.t_us);
  feed(sample, reply);
}

void StreamSession::on_begin_template(const json& msg, Reply& reply) {
  allow_keys(msg, {"letter"});
  const Label letter = string_field(msg, "letter");
  const auto& alphabet = store_->snapshot()->alphabet();
  if (std::find(alphabet.begin(), alphabet.end(), letter) == alphabet.end()) {
    ordered_json err = error_message("alphabet", "letter '" + letter + "' is not in the alphabet");
    reply.messages.push_back(err);
    return;
  }
  pending_template_ = letter;
}

void StreamSession::on_set_config(const json& msg, Reply&) {
  allow_keys(msg, {"size_in", "theta_deg", "mode"});
  if (msg.contains("size_in")) {
    const double inches = number_field(msg, "size_in");
    if (!(inches > 0.0 && inches <= 48.0)) throw BadMessage{"\"size_in\" must be in (0, 48]"};
    config_.letter_size_m = inches * kInchesToMeters;
  }
  if (msg.contains("theta_deg")) {
    const double deg = number_field(msg, "theta_deg");
    if (!(deg >= -90.0 && deg <= 90.0)) throw BadMessage{"\"theta_deg\" must be in [-90, 90]"};
    config_.theta_rad = deg * std::numbers::pi / 180.0;
  }
  if (msg.contains("mode")) {
    const std::string mode = string_field(msg, "mode");
    if (mode == "write") {
      pending_template_.reset();
    } else if (mode != "template") {
      throw BadMessage{"\"mode\" must be \"write\" or \"template\""};
    }
  }
}

void StreamSession::feed(const SensorSample& sample, Reply& reply) {
  auto ev = wear_.push(sample);
  if (!ev) return;
  if (ev->kind == SessionEventKind::Start) {
    ordered_json m = message("session_start");
    m["t_us"] = ev->t_us;
    reply.messages.push_back(std::move(m));
    return;
  }
  on_session_end(*ev, reply);
}

void StreamSession::on_session_end(const SessionEvent& end, Reply& reply) {
  ordered_json m = message("session_end");
  m["t_us"] = end.t_us;
  m["t_start_us"] = end.trace.empty() ? end.t_us : end.trace.front().t_us;
  m["n_samples"] = end.trace.size();
  reply.messages.push_back(std::move(m));

  const auto snapshot = store_->snapshot();
  const MobileStage rotate_only(config_.pipeline, nullptr);
  const SessionResult result = rotate_only.process(end, session_index_++);
  if (result.rotated.size() < 2) {
    reply.messages.push_back(error_message("session_too_short", "session has fewer than 2 samples"));
    return;
  }
  TraceMatrix trace = TraceMatrix::from_rotated(result.rotated);

  if (pending_template_) {
    const Label letter = *pending_template_;
    pending_template_.reset();
    const auto updated = store_->commit(letter, std::move(trace));
    ordered_json saved = message("template_saved");
    saved["letter"] = letter;
    saved["trained"] = updated->size();
    saved["missing"] = updated->missing();
    reply.messages.push_back(std::move(saved));
    return;
  }
  if (!snapshot->complete()) {
    ordered_json err = error_message("not_trained", "templates missing for some letters");
    err["missing"] = snapshot->missing();
    reply.messages.push_back(std::move(err));
    return;
  }
  const Prediction p = classify(*snapshot, trace, config_.pipeline.dtw);
  ordered_json pred = message("prediction");
  pred["letter"] = p.letter;
  ordered_json ranked = ordered_json::array();
  for (const auto& r : p.ranked) ranked.push_back(ordered_json{{"letter", r.label}, {"distance", r.distance}});
  pred["ranked"] = std::move(ranked);
  reply.messages.push_back(std::move(pred));
}

std::vector<ordered_json> pad_recording(const StrokePath& path, double mean_letter_s, double rate_hz,
                                        std::uint64_t seed, double t0_ms, double tail_ms) {
  const Trajectory traj(path, seconds_per_sqrt_unit(mean_letter_s), 0.1, seed);
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  const double period_s = 1.0 / rate_hz;

  std::vector<ordered_json> out;
  auto point = [&](double t_s, bool down) {
    ordered_json m = message("stroke_point");
    m["t_ms"] = t0_ms + t_s * 1000.0;
    m["pen"] = down ? "down" : "up";
    if (down) {
      const Point2 p = traj.position(t_s);
      m["x"] = std::clamp(p.h, 0.0, 1.0);
      m["y"] = std::clamp(1.0 - p.v, 0.0, 1.0);
    }
    out.push_back(std::move(m));
  };
  double t = 0.0;
  double last = 0.0;
  for (; t < traj.duration_s(); t += period_s * jitter(rng)) {
    point(t, t == 0.0 || traj.pen_down(t));
    last = t;
  }
  if (traj.duration_s() - last > 0.002) point(traj.duration_s(), true);
  const double end = traj.duration_s() + tail_ms / 1000.0;
  for (t = traj.duration_s() + 0.05; t <= end; t += 0.05) point(t, false);
  return out;
}

}  // namespace airdraw
