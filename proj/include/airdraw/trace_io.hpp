#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "airdraw/orientation.hpp"
#include "airdraw/sensor_model.hpp"

namespace airdraw {

// One sample per line: {"t_us": <int>, "la": [x, y, z], "g": [x, y, z]}.
// Rotated traces use the same shape without "g".

/// Throws ParseError naming the 1-based line on malformed JSON, missing or
/// non-finite fields, or a timestamp that does not strictly increase. Blank
/// lines are skipped.
std::vector<SensorSample> read_trace(std::istream& in);
std::vector<SensorSample> read_trace_file(const std::filesystem::path& path);

void write_trace(std::ostream& out, std::span<const SensorSample> samples);
void write_trace_file(const std::filesystem::path& path, std::span<const SensorSample> samples);
void write_rotated(std::ostream& out, std::span<const RotatedSample> samples);

}  // namespace airdraw
