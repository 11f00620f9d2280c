#include <cmath>
#include <cstdlib>
#include <numbers>

#include "airdraw/error.hpp"
#include "airdraw/synth.hpp"

namespace airdraw {

namespace {

constexpr double kDefaultDwellMs = 150.0;
constexpr double kArcStepDeg = 5.0;

/// Appends points to a stroke, skipping a point equal to the current end.
class StrokeBuilder {
 public:
  explicit StrokeBuilder(Point2 start) { points_.push_back(start); }

  StrokeBuilder& line_to(double h, double v) {
    add({h, v});
    return *this;
  }

  /// Elliptical arc around (ch, cv); angles in degrees, counterclockwise
  /// positive, so deg1 < deg0 runs clockwise.
  StrokeBuilder& arc(double ch, double cv, double rh, double rv, double deg0, double deg1) {
    const int steps = std::max(8, static_cast<int>(std::ceil(std::abs(deg1 - deg0) / kArcStepDeg)));
    for (int i = 0; i <= steps; ++i) {
      const double deg = deg0 + (deg1 - deg0) * i / steps;
      const double rad = deg * std::numbers::pi / 180.0;
      add({ch + rh * std::cos(rad), cv + rv * std::sin(rad)});
    }
    return *this;
  }

  Polyline build() const { return points_; }

 private:
  void add(Point2 p) {
    if (std::abs(p.h - points_.back().h) < 1e-12 && std::abs(p.v - points_.back().v) < 1e-12) return;
    points_.push_back(p);
  }

  Polyline points_;
};

StrokeBuilder from(double h, double v) { return StrokeBuilder({h, v}); }

Point2 arc_point(double ch, double cv, double rh, double rv, double deg) {
  const double rad = deg * std::numbers::pi / 180.0;
  return {ch + rh * std::cos(rad), cv + rv * std::sin(rad)};
}

StrokeBuilder from_arc(double ch, double cv, double rh, double rv, double deg0, double deg1) {
  StrokeBuilder b(arc_point(ch, cv, rh, rv, deg0));
  b.arc(ch, cv, rh, rv, deg0, deg1);
  return b;
}

StrokePath make(const char* letter, std::vector<Polyline> strokes) {
  StrokePath p;
  p.letter = letter;
  p.dwell_ms.assign(strokes.empty() ? 0 : strokes.size() - 1, kDefaultDwellMs);
  p.strokes = std::move(strokes);
  return p;
}

std::map<Label, StrokePath> build_library() {
  std::map<Label, StrokePath> lib;
  auto put = [&](StrokePath p) { lib.emplace(p.letter, std::move(p)); };

  // Bowl-and-stem family: a, d, g, q share a counterclockwise bowl closed
  // back on itself before the stem.
  put(make("a", {from_arc(0.42, 0.5, 0.33, 0.38, 30, 390).line_to(0.78, 0.9).line_to(0.78, 0.05).build()}));
  put(make("b", {from(0.25, 0.98).line_to(0.25, 0.03).line_to(0.25, 0.3)
                     .arc(0.5, 0.3, 0.25, 0.27, 180, -180).build()}));
  put(make("c", {from_arc(0.5, 0.5, 0.38, 0.4, 50, 310).build()}));
  put(make("d", {from_arc(0.4, 0.32, 0.3, 0.28, 30, 390).line_to(0.78, 0.98).line_to(0.78, 0.02).build()}));
  put(make("e", {from(0.15, 0.5).line_to(0.85, 0.5).arc(0.5, 0.5, 0.35, 0.4, 0, 320).build()}));
  put(make("f", {from_arc(0.62, 0.8, 0.2, 0.17, 20, 180).line_to(0.42, 0.02).build(),
                 from(0.15, 0.55).line_to(0.72, 0.55).build()}));
  put(make("g", {from_arc(0.42, 0.68, 0.3, 0.27, 30, 390).line_to(0.76, 0.97).line_to(0.76, 0.22)
                     .arc(0.5, 0.22, 0.26, 0.2, 0, -160).build()}));
  put(make("h", {from(0.25, 0.98).line_to(0.25, 0.03).line_to(0.25, 0.45)
                     .arc(0.5, 0.45, 0.25, 0.3, 180, 0).line_to(0.75, 0.03).build()}));
  put(make("i", {from(0.5, 0.7).line_to(0.5, 0.03).build(), from(0.5, 0.88).line_to(0.5, 0.95).build()}));
  put(make("j", {from(0.62, 0.7).line_to(0.62, 0.25).arc(0.42, 0.25, 0.2, 0.22, 0, -180).build(),
                 from(0.62, 0.88).line_to(0.62, 0.95).build()}));
  put(make("k", {from(0.25, 0.98).line_to(0.25, 0.03).build(),
                 from(0.75, 0.7).line_to(0.27, 0.38).line_to(0.75, 0.03).build()}));
  put(make("l", {from(0.5, 0.98).line_to(0.5, 0.03).build()}));
  put(make("m", {from(0.1, 0.75).line_to(0.1, 0.03).line_to(0.1, 0.5)
                     .arc(0.3, 0.5, 0.2, 0.25, 180, 0).line_to(0.5, 0.03).line_to(0.5, 0.5)
                     .arc(0.7, 0.5, 0.2, 0.25, 180, 0).line_to(0.9, 0.03).build()}));
  put(make("n", {from(0.25, 0.75).line_to(0.25, 0.03).line_to(0.25, 0.45)
                     .arc(0.5, 0.45, 0.25, 0.3, 180, 0).line_to(0.75, 0.03).build()}));
  put(make("o", {from_arc(0.5, 0.5, 0.38, 0.42, 90, 450).build()}));
  put(make("p", {from(0.25, 0.9).line_to(0.25, 0.0).line_to(0.25, 0.62)
                     .arc(0.5, 0.62, 0.25, 0.26, 180, -180).build()}));
  put(make("q", {from_arc(0.42, 0.68, 0.3, 0.27, 30, 390).line_to(0.76, 0.97).line_to(0.76, 0.02)
                     .line_to(0.92, 0.14).build()}));
  put(make("r", {from(0.3, 0.8).line_to(0.3, 0.03).line_to(0.3, 0.5)
                     .arc(0.55, 0.5, 0.25, 0.25, 180, 40).build()}));
  put(make("s", {from_arc(0.5, 0.72, 0.25, 0.2, 20, 270).arc(0.5, 0.3, 0.25, 0.22, 90, -160).build()}));
  put(make("t", {from(0.5, 0.98).line_to(0.5, 0.03).build(), from(0.2, 0.68).line_to(0.8, 0.68).build()}));
  put(make("u", {from(0.2, 0.9).line_to(0.2, 0.4).arc(0.45, 0.4, 0.25, 0.3, 180, 360)
                     .line_to(0.7, 0.9).line_to(0.7, 0.05).build()}));
  put(make("v", {from(0.1, 0.9).line_to(0.5, 0.05).line_to(0.9, 0.9).build()}));
  put(make("w", {from(0.05, 0.9).line_to(0.27, 0.08).line_to(0.5, 0.7).line_to(0.73, 0.08)
                     .line_to(0.95, 0.9).build()}));
  put(make("x", {from(0.1, 0.9).line_to(0.9, 0.05).build(), from(0.9, 0.9).line_to(0.1, 0.05).build()}));
  put(make("y", {from(0.15, 0.9).line_to(0.5, 0.45).build(), from(0.85, 0.9).line_to(0.2, 0.0).build()}));
  put(make("z", {from(0.1, 0.9).line_to(0.9, 0.9).line_to(0.1, 0.1).line_to(0.9, 0.1).build()}));
  return lib;
}

}  // namespace

const std::map<Label, StrokePath>& letter_paths() {
  static const std::map<Label, StrokePath> library = build_library();
  return library;
}

const StrokePath& letter_path(const Label& letter) {
  const auto& lib = letter_paths();
  auto it = lib.find(letter);
  if (it == lib.end()) throw Error(ErrorCode::Synthesis, "no stroke path for '" + letter + "'");
  return it->second;
}

}  // namespace airdraw
