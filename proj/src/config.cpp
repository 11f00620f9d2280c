#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "airdraw/error.hpp"
#include "airdraw/pipeline.hpp"

namespace airdraw {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::Configuration, "config line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view text, std::size_t line) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(line, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string parse_string(std::string_view text, std::size_t line) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '"' || text.back() != '"') {
    fail(line, "expected a quoted string");
  }
  return std::string(text.substr(1, text.size() - 2));
}

std::vector<double> parse_array(std::string_view text, std::size_t line) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    fail(line, "expected an array");
  }
  text = text.substr(1, text.size() - 2);
  std::vector<double> out;
  while (!trim(text).empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number(text.substr(0, comma), line));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void check_range(double v, double lo, double hi, bool lo_open, std::size_t line, const char* key) {
  const bool ok = (lo_open ? v > lo : v >= lo) && v <= hi;
  if (!ok) fail(line, std::string(key) + " out of range");
}

}  // namespace

void PipelineConfig::validate() const {
  session.validate();
  if (dtw.band_fraction && !(*dtw.band_fraction >= 0.0 && *dtw.band_fraction <= 1.0)) {
    throw Error(ErrorCode::Configuration, "dtw band fraction must be in [0, 1]");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> kSections{"filter", "session", "orientation", "dtw", "io"};
      if (!kSections.count(section)) fail(line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) fail(line_no, "duplicate key " + full);

    if (full == "filter.weights") {
      const auto w = parse_array(value, line_no);
      if (w.empty() || w.size() > 64) fail(line_no, "filter.weights needs 1..64 entries");
      for (double x : w) {
        if (!(x > 0.0)) fail(line_no, "filter.weights must be positive");
      }
      cfg.filter = FilterSpec::from_weights(w);
    } else if (full == "session.threshold") {
      cfg.session.threshold = parse_number(value, line_no);
      check_range(cfg.session.threshold, 0.0, 100.0, true, line_no, "session.threshold");
    } else if (full == "session.hold_ms") {
      cfg.session.hold_ms = parse_number(value, line_no);
      check_range(cfg.session.hold_ms, 0.0, 10000.0, true, line_no, "session.hold_ms");
    } else if (full == "orientation.angle_mode") {
      const auto mode = parse_string(value, line_no);
      if (mode == "per_sample") {
        cfg.angle_mode = AngleMode::PerSample;
      } else if (mode == "per_session") {
        cfg.angle_mode = AngleMode::PerSession;
      } else {
        fail(line_no, "angle_mode must be \"per_sample\" or \"per_session\"");
      }
    } else if (full == "dtw.band_fraction") {
      const double f = parse_number(value, line_no);
      check_range(f, 0.0, 1.0, false, line_no, "dtw.band_fraction");
      cfg.dtw.band_fraction = f;
    } else if (full == "io.templates") {
      cfg.templates = parse_string(value, line_no);
    } else {
      fail(line_no, "unknown key " + (section.empty() ? key : full));
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Configuration, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace airdraw
