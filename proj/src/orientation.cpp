#include "airdraw/orientation.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "airdraw/error.hpp"

namespace airdraw {

namespace {

constexpr double kMinGravityNorm = 1e-6;
constexpr double kMaxRollRatio = 0.3;

double wrap_angle(double radians) {
  // (-pi, pi]
  double wrapped = std::remainder(radians, 2.0 * std::numbers::pi);
  if (wrapped <= -std::numbers::pi) wrapped += 2.0 * std::numbers::pi;
  return wrapped;
}

std::optional<ArmAngle> try_angle(const Vec3& g) {
  const double n = gravity_norm(g);
  if (!(n > kMinGravityNorm)) return std::nullopt;
  const Vec3 u = (1.0 / n) * g;
  if (u.x == 0.0 && u.y == 0.0) return std::nullopt;
  return ArmAngle(std::atan2(-u.x, -u.y));
}

}  // namespace

ArmAngle::ArmAngle(double radians) : radians_(wrap_angle(radians)) {}

ArmAngle ArmAngle::from_degrees(double degrees) {
  return ArmAngle(degrees * std::numbers::pi / 180.0);
}

double ArmAngle::degrees() const { return radians_ * 180.0 / std::numbers::pi; }

double gravity_norm(const Vec3& g) { return norm(g); }

Vec3 normalize_gravity(const Vec3& g) {
  const double n = gravity_norm(g);
  if (!(n > kMinGravityNorm)) {
    throw Error(ErrorCode::DegenerateGravity, "gravity norm too small to normalize");
  }
  return (1.0 / n) * g;
}

ArmAngle arm_angle(const Vec3& g_normalized) {
  if (g_normalized.x == 0.0 && g_normalized.y == 0.0) {
    throw Error(ErrorCode::IndeterminateAngle, "gravity has no x/y projection");
  }
  return ArmAngle(std::atan2(-g_normalized.x, -g_normalized.y));
}

ArmAngle arm_angle_from_gravity(const Vec3& g) { return arm_angle(normalize_gravity(g)); }

Vec3 rotate_xy(const Vec3& v, ArmAngle theta) {
  const double c = std::cos(theta.radians());
  const double s = std::sin(theta.radians());
  return {v.x * c + v.y * s, -v.x * s + v.y * c, v.z};
}

RotatedSample rotate_frame(const SensorSample& sample, ArmAngle theta) {
  return {sample.t_us, rotate_xy(sample.linear_accel, theta)};
}

std::vector<RotatedSample> rotate_trace(std::span<const SensorSample> trace, AngleMode mode) {
  std::vector<RotatedSample> out;
  out.reserve(trace.size());
  if (trace.empty()) return out;

  if (mode == AngleMode::PerSession) {
    Vec3 mean;
    for (const auto& s : trace) mean = mean + s.gravity;
    mean = (1.0 / static_cast<double>(trace.size())) * mean;
    const auto theta = try_angle(mean);
    if (!theta) throw Error(ErrorCode::IndeterminateAngle, "mean gravity yields no arm angle");
    for (const auto& s : trace) out.push_back(rotate_frame(s, *theta));
    return out;
  }

  std::vector<std::optional<ArmAngle>> angles;
  angles.reserve(trace.size());
  std::optional<ArmAngle> first_valid;
  for (const auto& s : trace) {
    angles.push_back(try_angle(s.gravity));
    if (!first_valid && angles.back()) first_valid = angles.back();
  }
  if (!first_valid) throw Error(ErrorCode::IndeterminateAngle, "no sample yields an arm angle");

  ArmAngle last = *first_valid;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (angles[i]) last = *angles[i];
    out.push_back(rotate_frame(trace[i], last));
  }
  return out;
}

std::vector<QualityWarning> gravity_quality(std::span<const SensorSample> trace,
                                            std::size_t warmup) {
  std::vector<QualityWarning> warnings;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace[i];
    const double n = gravity_norm(s.gravity);
    if (i >= warmup && (n < 0.5 * kStandardGravity || n > 1.5 * kStandardGravity)) {
      warnings.push_back({s.t_us, "gravity magnitude " + std::to_string(n) + " outside [0.5 g0, 1.5 g0]"});
    }
    if (n > kMinGravityNorm && std::abs(s.gravity.z) / n > kMaxRollRatio) {
      warnings.push_back({s.t_us, "wrist roll: |gz|/|g| exceeds 0.3"});
    }
  }
  return warnings;
}

}  // namespace airdraw
