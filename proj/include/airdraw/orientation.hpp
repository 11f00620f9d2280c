#pragma once

#include <span>
#include <string>
#include <vector>

#include "airdraw/sensor_model.hpp"

namespace airdraw {

// Device frame convention used throughout:
//   x  along the forearm toward the hand,
//   y  perpendicular to the forearm in the writing plane,
//   z  left/right, untouched by the arm's elevation.
// With the arm horizontal the gravity channel reads (0, -g, 0). Raising the
// hand by theta moves gravity to (-g sin theta, -g cos theta, 0), and the arm
// angle is atan2(-gx, -gy). rotate_frame applies R(-theta) to (x, y), which
// maps world up/down motion back onto y alone for any theta.

/// Arm elevation in radians, wrapped to (-pi, pi].
class ArmAngle {
 public:
  constexpr ArmAngle() = default;
  explicit ArmAngle(double radians);

  static ArmAngle from_degrees(double degrees);

  double radians() const { return radians_; }
  double degrees() const;

 private:
  double radians_ = 0.0;
};

struct RotatedSample {
  TimestampUs t_us = 0;
  Vec3 accel;  // x back/forth, y up/down, z left/right
};

/// Euclidean norm of the gravity vector.
double gravity_norm(const Vec3& g);

/// Unit gravity direction. Throws Error(DegenerateGravity) when the norm is
/// at or below 1e-6 (free fall or bad data).
Vec3 normalize_gravity(const Vec3& g);

/// Throws Error(IndeterminateAngle) when the x and y projections are both
/// zero (arm rolled a full 90 degrees).
ArmAngle arm_angle(const Vec3& g_normalized);

/// Convenience: arm_angle(normalize_gravity(g)).
ArmAngle arm_angle_from_gravity(const Vec3& g);

/// R(-theta) applied to the (x, y) components; z passes through.
Vec3 rotate_xy(const Vec3& v, ArmAngle theta);

RotatedSample rotate_frame(const SensorSample& sample, ArmAngle theta);

enum class AngleMode {
  PerSample,   // each sample rotated by the angle of its own gravity reading
  PerSession,  // one angle from the mean gravity of the whole trace
};

/// Rotates a trace. In per-sample mode a sample whose gravity gives no usable
/// angle reuses the nearest earlier usable angle (or the first later one at
/// the head). Throws Error(IndeterminateAngle) if no sample yields an angle.
std::vector<RotatedSample> rotate_trace(std::span<const SensorSample> trace, AngleMode mode);

struct QualityWarning {
  TimestampUs t_us = 0;
  std::string message;
};

/// Flags gravity magnitudes outside [0.5 g0, 1.5 g0] and wrist roll with
/// |gz| / |g| > 0.3. Warnings only; nothing is rejected. The first
/// `warmup` samples are not checked for magnitude.
std::vector<QualityWarning> gravity_quality(std::span<const SensorSample> trace,
                                            std::size_t warmup = 0);

}  // namespace airdraw
