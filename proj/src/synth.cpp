#include "airdraw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "airdraw/error.hpp"

namespace airdraw {

namespace {

constexpr double kCornerTurnRad = 35.0 * std::numbers::pi / 180.0;
constexpr double kMinLength = 1e-9;

double distance(Point2 a, Point2 b) { return std::hypot(b.h - a.h, b.v - a.v); }

double turn_angle(Point2 a, Point2 b, Point2 c) {
  const double h1 = b.h - a.h, v1 = b.v - a.v;
  const double h2 = c.h - b.h, v2 = c.v - b.v;
  const double cross = h1 * v2 - v1 * h2;
  const double dot = h1 * h2 + v1 * v2;
  return std::abs(std::atan2(cross, dot));
}

struct PieceShape {
  Polyline points;
  bool pen_down = true;
  double dwell_before_s = 0.0;
};

double polyline_length(const Polyline& p) {
  double len = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) len += distance(p[i - 1], p[i]);
  return len;
}

/// Motion pieces of a path in writing order, with dwells attached.
std::vector<PieceShape> split_pieces(const StrokePath& path) {
  if (path.strokes.empty()) throw Error(ErrorCode::Synthesis, "path has no strokes");
  std::vector<PieceShape> out;
  for (std::size_t s = 0; s < path.strokes.size(); ++s) {
    const Polyline& stroke = path.strokes[s];
    if (stroke.size() < 2) {
      throw Error(ErrorCode::Synthesis, "stroke of '" + path.letter + "' has fewer than 2 points");
    }
    if (polyline_length(stroke) <= kMinLength) {
      throw Error(ErrorCode::Synthesis, "stroke of '" + path.letter + "' has zero length");
    }
    if (s > 0) {
      const double dwell = s - 1 < path.dwell_ms.size() ? path.dwell_ms[s - 1] : 150.0;
      const Point2 from = out.back().points.back();
      const Point2 to = stroke.front();
      if (distance(from, to) > kMinLength) {
        out.push_back({{from, to}, false, dwell / 1000.0});
      } else if (dwell > 0.0) {
        // No transit: the dwell lands on the next stroke's first piece.
        out.push_back({{from, from}, false, dwell / 1000.0});
      }
    }
    PieceShape current{{stroke.front()}, true, 0.0};
    for (std::size_t i = 1; i < stroke.size(); ++i) {
      if (distance(stroke[i - 1], stroke[i]) <= kMinLength) continue;
      if (current.points.size() >= 2 &&
          turn_angle(current.points[current.points.size() - 2], current.points.back(), stroke[i]) >
              kCornerTurnRad) {
        const Point2 corner = current.points.back();
        out.push_back(std::move(current));
        current = {{corner}, true, 0.0};
      }
      current.points.push_back(stroke[i]);
    }
    out.push_back(std::move(current));
  }
  return out;
}

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

struct PathCost {
  double sqrt_length = 0.0;
  double dwell_s = 0.0;
};

PathCost path_cost(const StrokePath& path) {
  PathCost cost;
  for (const auto& piece : split_pieces(path)) {
    cost.dwell_s += piece.dwell_before_s;
    cost.sqrt_length += std::sqrt(polyline_length(piece.points));
  }
  return cost;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void SynthSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::Configuration, what);
  };
  require(letter_size_m > 0.0 && std::isfinite(letter_size_m), "letter size must be positive");
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), "sample rate must be positive");
  require(duration_s > 0.0 && std::isfinite(duration_s), "duration must be positive");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise sigma must be >= 0");
  require(timing_jitter >= 0.0 && timing_jitter < 1.0, "timing jitter must be in [0, 1)");
  require(lead_ms >= 0.0 && tail_ms >= 0.0, "quiet padding must be >= 0");
  require(std::isfinite(theta_start_rad) && std::isfinite(theta_end_rad), "theta must be finite");
}

Trajectory::Trajectory(const StrokePath& path, double seconds_per_sqrt_unit, double timing_jitter,
                       std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 1));
  std::uniform_real_distribution<double> jitter(1.0 - timing_jitter, 1.0 + timing_jitter);
  double t = 0.0;
  for (auto& shape : split_pieces(path)) {
    t += shape.dwell_before_s;
    Piece piece;
    piece.points = std::move(shape.points);
    piece.pen_down = shape.pen_down;
    piece.cumulative.assign(1, 0.0);
    for (std::size_t i = 1; i < piece.points.size(); ++i) {
      piece.cumulative.push_back(piece.cumulative.back() +
                                 distance(piece.points[i - 1], piece.points[i]));
    }
    const double length = piece.cumulative.back();
    double span = seconds_per_sqrt_unit * std::sqrt(length);
    if (timing_jitter > 0.0) span *= jitter(rng);
    piece.t0 = t;
    piece.t1 = t + span;
    t = piece.t1;
    pieces_.push_back(std::move(piece));
  }
  duration_s_ = t;
}

Point2 Trajectory::position(double t_s) const {
  if (t_s <= 0.0) return pieces_.front().points.front();
  // First piece whose end is at or after t.
  auto it = std::lower_bound(pieces_.begin(), pieces_.end(), t_s,
                             [](const Piece& p, double t) { return p.t1 < t; });
  if (it == pieces_.end()) return pieces_.back().points.back();
  const Piece& p = *it;
  if (t_s <= p.t0 || p.t1 <= p.t0) return p.points.front();  // dwelling before the piece
  const double s = smoothstep((t_s - p.t0) / (p.t1 - p.t0)) * p.cumulative.back();
  auto seg = std::upper_bound(p.cumulative.begin(), p.cumulative.end(), s);
  if (seg == p.cumulative.end()) return p.points.back();
  const std::size_t j = static_cast<std::size_t>(seg - p.cumulative.begin());
  const double seg_len = p.cumulative[j] - p.cumulative[j - 1];
  const double f = seg_len > 0.0 ? (s - p.cumulative[j - 1]) / seg_len : 0.0;
  const Point2 a = p.points[j - 1], b = p.points[j];
  return {a.h + f * (b.h - a.h), a.v + f * (b.v - a.v)};
}

bool Trajectory::pen_down(double t_s) const {
  for (const auto& p : pieces_) {
    if (t_s >= p.t0 && t_s <= p.t1) return p.pen_down;
  }
  return false;
}

double seconds_per_sqrt_unit(double mean_letter_s) {
  double sqrt_sum = 0.0;
  double dwell_sum = 0.0;
  for (const auto& [letter, path] : letter_paths()) {
    const auto cost = path_cost(path);
    sqrt_sum += cost.sqrt_length;
    dwell_sum += cost.dwell_s;
  }
  const double n = static_cast<double>(letter_paths().size());
  const double motion = mean_letter_s - dwell_sum / n;
  if (!(motion > 0.0)) {
    throw Error(ErrorCode::Synthesis, "duration shorter than the average pen-up dwell");
  }
  return motion / (sqrt_sum / n);
}

std::vector<SensorSample> synthesize(const StrokePath& path, const SynthSpec& spec,
                                     TimestampUs t0_us) {
  spec.validate();
  const Trajectory traj(path, seconds_per_sqrt_unit(spec.duration_s), spec.timing_jitter,
                        spec.seed);

  const double dt = 1.0 / spec.sample_rate_hz;
  const double lead_s = spec.lead_ms / 1000.0;
  const double span_s = lead_s + traj.duration_s() + spec.tail_ms / 1000.0;
  const auto n = static_cast<std::size_t>(std::ceil(span_s * spec.sample_rate_hz)) + 1;

  std::mt19937_64 rng(mix_seed(spec.seed, 2));
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  auto noisy = [&](double v) { return spec.noise_sigma > 0.0 ? v + noise(rng) : v; };

  auto world = [&](double t) {
    const Point2 p = traj.position(t - lead_s);
    return Point2{p.h * spec.letter_size_m, p.v * spec.letter_size_m};
  };

  std::vector<SensorSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    const Point2 prev = world(t - dt), here = world(t), next = world(t + dt);
    const double a_h = (next.h - 2.0 * here.h + prev.h) / (dt * dt);
    const double a_v = (next.v - 2.0 * here.v + prev.v) / (dt * dt);

    const double frac = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    const double theta = spec.theta_start_rad + frac * (spec.theta_end_rad - spec.theta_start_rad);
    const double s = std::sin(theta), c = std::cos(theta);

    SensorSample sample;
    sample.t_us = t0_us + static_cast<TimestampUs>(std::llround(static_cast<double>(k) * 1e6 /
                                                               spec.sample_rate_hz));
    // Device (x, y) = R(+theta) * (0, a_v); z carries horizontal motion.
    sample.linear_accel = {noisy(-a_v * s), noisy(a_v * c), noisy(a_h)};
    sample.gravity = {noisy(-kStandardGravity * s), noisy(-kStandardGravity * c), noisy(0.0)};
    out.push_back(sample);
  }
  return out;
}

std::vector<SensorSample> synthesize_word(std::string_view word, const SynthSpec& spec,
                                          double gap_ms) {
  if (!(gap_ms >= 0.0)) throw Error(ErrorCode::Configuration, "gap must be >= 0");
  std::vector<SensorSample> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const StrokePath& path = letter_path(Label(1, word[i]));
    SynthSpec letter_spec = spec;
    letter_spec.seed = mix_seed(spec.seed, 100 + i);
    letter_spec.lead_ms = i == 0 ? spec.lead_ms : 0.0;
    letter_spec.tail_ms = i + 1 == word.size() ? spec.tail_ms : gap_ms;
    // The first sample of each later letter would repeat the previous
    // letter's last (quiet) timestamp, so start one period later.
    const TimestampUs t0 =
        out.empty() ? 0
                    : out.back().t_us + static_cast<TimestampUs>(std::llround(1e6 / spec.sample_rate_hz));
    auto trace = synthesize(path, letter_spec, t0);
    out.insert(out.end(), trace.begin(), trace.end());
  }
  return out;
}

StrokePath perturb_path(const StrokePath& path, double magnitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-magnitude, magnitude);
  const double rot = u(rng), sx = 1.0 + u(rng), sy = 1.0 + u(rng), shear = u(rng);
  const double c = std::cos(rot), s = std::sin(rot);
  StrokePath out = path;
  for (auto& stroke : out.strokes) {
    for (auto& p : stroke) {
      const double h = p.h - 0.5, v = p.v - 0.5;
      const double h1 = sx * h + shear * v, v1 = sy * v;
      p = {0.5 + c * h1 - s * v1, 0.5 + s * h1 + c * v1};
    }
  }
  return out;
}

StrokePath oscillation_path(int cycles) {
  StrokePath path;
  path.letter = "|";
  Polyline zigzag{{0.5, 0.0}};
  for (int i = 0; i < cycles; ++i) {
    zigzag.push_back({0.5, 1.0});
    zigzag.push_back({0.5, 0.0});
  }
  path.strokes.push_back(std::move(zigzag));
  return path;
}

}  // namespace airdraw
