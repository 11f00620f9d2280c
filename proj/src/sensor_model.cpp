#include "airdraw/sensor_model.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "airdraw/error.hpp"

namespace airdraw {

double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

void validate_stream(std::span<const SensorSample> stream) {
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (!is_finite(stream[i].linear_accel) || !is_finite(stream[i].gravity)) {
      throw Error(ErrorCode::Ingestion, "non-finite component at sample " + std::to_string(i));
    }
    if (i > 0 && stream[i].t_us <= stream[i - 1].t_us) {
      throw Error(ErrorCode::Ingestion,
                  "timestamps not strictly increasing at sample " + std::to_string(i));
    }
  }
}

FilterSpec::FilterSpec() : FilterSpec(linear_ramp(5)) {}

FilterSpec FilterSpec::from_weights(std::vector<double> weights) {
  if (weights.empty()) {
    throw Error(ErrorCode::Configuration, "filter weights must not be empty");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w <= 0.0) {
      throw Error(ErrorCode::Configuration, "filter weights must be positive and finite");
    }
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  return FilterSpec(std::move(weights));
}

FilterSpec FilterSpec::uniform(std::size_t window) {
  return from_weights(std::vector<double>(window, 1.0));
}

FilterSpec FilterSpec::linear_ramp(std::size_t window) {
  std::vector<double> w(window);
  std::iota(w.begin(), w.end(), 1.0);
  return from_weights(std::move(w));
}

WeightedMovingAverage::WeightedMovingAverage(FilterSpec spec)
    : spec_(std::move(spec)), ring_(spec_.window_length()) {}

Vec3 WeightedMovingAverage::push(const Vec3& value) {
  const std::size_t n = ring_.size();
  ring_[next_] = value;
  next_ = (next_ + 1) % n;
  if (filled_ < n) ++filled_;

  const auto weights = spec_.weights();
  // Accumulate deviations from the newest value so that a constant window
  // reproduces its value bit-exactly.
  const Vec3& newest = value;
  Vec3 deviation;
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < filled_; ++k) {
    const std::size_t slot = (next_ + n - 1 - k) % n;
    const double w = weights[n - 1 - k];
    deviation = deviation + w * (ring_[slot] - newest);
    weight_sum += w;
  }
  return newest + (1.0 / weight_sum) * deviation;
}

void WeightedMovingAverage::reset() {
  next_ = 0;
  filled_ = 0;
}

SensorSample StreamSmoother::push(const SensorSample& sample) {
  return {sample.t_us, accel_.push(sample.linear_accel), gravity_.push(sample.gravity)};
}

std::vector<SensorSample> smooth(std::span<const SensorSample> stream, const FilterSpec& spec,
                                 Channel channel) {
  validate_stream(stream);
  WeightedMovingAverage accel(spec);
  WeightedMovingAverage gravity(spec);
  const bool do_accel = channel != Channel::Gravity;
  const bool do_gravity = channel != Channel::LinearAccel;

  std::vector<SensorSample> out;
  out.reserve(stream.size());
  for (const auto& s : stream) {
    SensorSample o = s;
    if (do_accel) o.linear_accel = accel.push(s.linear_accel);
    if (do_gravity) o.gravity = gravity.push(s.gravity);
    out.push_back(o);
  }
  return out;
}

}  // namespace airdraw
