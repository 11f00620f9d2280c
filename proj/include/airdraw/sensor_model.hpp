#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace airdraw {

/// Standard gravity, m/s^2.
inline constexpr double kStandardGravity = 9.80665;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

double norm(const Vec3& v);
bool is_finite(const Vec3& v);

/// Microseconds since an arbitrary per-stream epoch.
using TimestampUs = std::int64_t;

struct SensorSample {
  TimestampUs t_us = 0;
  Vec3 linear_accel;
  Vec3 gravity;

  friend bool operator==(const SensorSample&, const SensorSample&) = default;
};

/// Throws Error(Ingestion) unless timestamps strictly increase and every
/// component is finite.
void validate_stream(std::span<const SensorSample> stream);

/// Normalized weights of a causal weighted moving average. weights()[0]
/// applies to the oldest sample in the window, weights().back() to the
/// newest.
class FilterSpec {
 public:
  /// Default filter: window 5, linearly increasing weights (1..5)/15.
  FilterSpec();

  static FilterSpec from_weights(std::vector<double> weights);
  static FilterSpec uniform(std::size_t window);
  static FilterSpec linear_ramp(std::size_t window);

  std::size_t window_length() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }

 private:
  explicit FilterSpec(std::vector<double> normalized) : weights_(std::move(normalized)) {}

  std::vector<double> weights_;
};

/// Streaming form of the filter for one 3-axis channel. While fewer than
/// window_length samples have been seen the newest-aligned tail of the weights
/// is used and renormalized.
class WeightedMovingAverage {
 public:
  explicit WeightedMovingAverage(FilterSpec spec);

  Vec3 push(const Vec3& value);
  void reset();

 private:
  FilterSpec spec_;
  std::vector<Vec3> ring_;
  std::size_t next_ = 0;
  std::size_t filled_ = 0;
};

enum class Channel { LinearAccel, Gravity, Both };

std::vector<SensorSample> smooth(std::span<const SensorSample> stream,
                                 const FilterSpec& spec, Channel channel);

/// Smooths both channels one sample at a time.
class StreamSmoother {
 public:
  explicit StreamSmoother(const FilterSpec& spec) : accel_(spec), gravity_(spec) {}

  SensorSample push(const SensorSample& sample);

 private:
  WeightedMovingAverage accel_;
  WeightedMovingAverage gravity_;
};

}  // namespace airdraw
