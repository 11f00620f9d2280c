#include "airdraw/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "airdraw/error.hpp"

namespace airdraw {

namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& doc, const char* key, std::size_t line) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(line, std::string("missing \"") + key + "\"");
  if (!it->is_array() || it->size() != 3) {
    throw ParseError(line, std::string("\"") + key + "\" must be an array of 3 numbers");
  }
  double v[3];
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& e = (*it)[i];
    if (!e.is_number()) throw ParseError(line, std::string("\"") + key + "\" has a non-number");
    v[i] = e.get<double>();
    if (!std::isfinite(v[i])) throw ParseError(line, std::string("\"") + key + "\" not finite");
  }
  return {v[0], v[1], v[2]};
}

nlohmann::ordered_json vec_json(const Vec3& v) { return nlohmann::ordered_json::array({v.x, v.y, v.z}); }

}  // namespace

std::vector<SensorSample> read_trace(std::istream& in) {
  std::vector<SensorSample> out;
  std::optional<TimestampUs> last;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, "malformed JSON");
    }
    if (!doc.is_object()) throw ParseError(line, "expected a JSON object");
    auto t = doc.find("t_us");
    if (t == doc.end() || !t->is_number_integer()) {
      throw ParseError(line, "\"t_us\" must be an integer");
    }
    SensorSample s;
    s.t_us = t->get<TimestampUs>();
    s.linear_accel = parse_vec3(doc, "la", line);
    s.gravity = parse_vec3(doc, "g", line);
    if (last && s.t_us <= *last) throw ParseError(line, "\"t_us\" not strictly increasing");
    last = s.t_us;
    out.push_back(s);
  }
  return out;
}

std::vector<SensorSample> read_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open " + path.string());
  return read_trace(in);
}

void write_trace(std::ostream& out, std::span<const SensorSample> samples) {
  for (const auto& s : samples) {
    const nlohmann::ordered_json doc = {
        {"t_us", s.t_us}, {"la", vec_json(s.linear_accel)}, {"g", vec_json(s.gravity)}};
    out << doc.dump() << '\n';
  }
}

void write_trace_file(const std::filesystem::path& path, std::span<const SensorSample> samples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Parse, "cannot write " + path.string());
  write_trace(out, samples);
}

void write_rotated(std::ostream& out, std::span<const RotatedSample> samples) {
  for (const auto& s : samples) {
    const nlohmann::ordered_json doc = {{"t_us", s.t_us}, {"la", vec_json(s.accel)}};
    out << doc.dump() << '\n';
  }
}

}  // namespace airdraw
