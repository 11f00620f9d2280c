#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string_view>
#include <vector>

#include "airdraw/classifier.hpp"
#include "airdraw/sensor_model.hpp"

namespace airdraw {

/// Point in the writing plane: h is left/right, v is up/down.
struct Point2 {
  double h = 0.0;
  double v = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

using Polyline = std::vector<Point2>;

struct StrokePath {
  Label letter;
  std::vector<Polyline> strokes;
  /// Pen-up dwell before moving to stroke i + 1; one entry per gap.
  std::vector<double> dwell_ms;
};

/// Lowercase a-z stroke fixtures in the unit box [0,1]^2. Deterministic.
const std::map<Label, StrokePath>& letter_paths();

/// Path for one letter; throws Error(Synthesis) for letters outside a-z.
const StrokePath& letter_path(const Label& letter);

struct SynthSpec {
  double letter_size_m = 0.3048;  // 12 inches
  double sample_rate_hz = 100.0;
  /// Average writing time of a letter over the a-z library. Individual
  /// letters scale with their path complexity.
  double duration_s = 1.5;
  double noise_sigma = 0.0;  // m/s^2, every channel
  /// Arm elevation, swept linearly from start to end over the whole trace.
  double theta_start_rad = 0.0;
  double theta_end_rad = 0.0;
  /// Each motion segment's duration is scaled by U[1 - j, 1 + j].
  double timing_jitter = 0.0;
  double lead_ms = 600.0;
  double tail_ms = 600.0;
  std::uint64_t seed = 0;

  void set_theta(double radians) { theta_start_rad = theta_end_rad = radians; }
  void validate() const;
};

inline constexpr double kInchesToMeters = 0.0254;

/// Time-parameterized pen trajectory in unit-box coordinates.
///
/// Strokes are split at corners turning more than 35 degrees. Each piece
/// follows a smoothstep (3u^2 - 2u^3) arc-length profile, so velocity is zero
/// at every piece boundary. A piece of unit length L lasts
/// seconds_per_sqrt_unit * sqrt(L), which gives every piece the same peak
/// acceleration. Between strokes the pen dwells, then makes a pen-up transit
/// to the next stroke's first point.
class Trajectory {
 public:
  /// Throws Error(Synthesis) on a stroke with fewer than 2 points or with
  /// zero length.
  Trajectory(const StrokePath& path, double seconds_per_sqrt_unit, double timing_jitter = 0.0,
             std::uint64_t seed = 0);

  double duration_s() const { return duration_s_; }
  /// Clamped to the first/last point outside [0, duration].
  Point2 position(double t_s) const;
  bool pen_down(double t_s) const;

 private:
  struct Piece {
    Polyline points;
    std::vector<double> cumulative;  // arc length at each point
    double t0 = 0.0;
    double t1 = 0.0;
    bool pen_down = true;
  };

  std::vector<Piece> pieces_;
  double duration_s_ = 0.0;
};

/// Seconds per sqrt(unit length) that makes the average a-z letter last
/// `mean_letter_s` including its dwells.
double seconds_per_sqrt_unit(double mean_letter_s);

/// Generates a labeled sensor trace for a path: scale to letter_size, time
/// parameterize, take central second differences, map horizontal -> device z
/// and vertical -> world y, rotate (world x, world y) by +theta into the
/// device frame, set gravity to (-g0 sin theta, -g0 cos theta, 0), add noise,
/// pad with quiet samples. Timestamps start at t0_us.
std::vector<SensorSample> synthesize(const StrokePath& path, const SynthSpec& spec,
                                     TimestampUs t0_us = 0);

/// Letters separated by gap_ms of quiet. Throws Error(Synthesis) on any
/// character without a path.
std::vector<SensorSample> synthesize_word(std::string_view word, const SynthSpec& spec,
                                          double gap_ms);

/// Random affine distortion about the box center: rotation, per-axis scale
/// and shear drawn uniformly within +-magnitude (rotation in radians).
StrokePath perturb_path(const StrokePath& path, double magnitude, std::mt19937_64& rng);

/// Vertical zig-zag oscillation: `cycles` up-and-down strokes of unit height.
StrokePath oscillation_path(int cycles);

}  // namespace airdraw
