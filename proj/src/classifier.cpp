#include "airdraw/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "airdraw/error.hpp"

namespace airdraw {

TraceMatrix::TraceMatrix(std::vector<double> x, std::vector<double> y, std::vector<double> z,
                         std::optional<Label> label)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)), label_(std::move(label)) {
  if (x_.size() != y_.size() || x_.size() != z_.size()) {
    throw Error(ErrorCode::EmptyInput, "trace axes differ in length");
  }
  if (x_.size() < 2) throw Error(ErrorCode::EmptyInput, "trace needs at least 2 samples");
  for (const auto* axis : {&x_, &y_, &z_}) {
    for (double v : *axis) {
      if (!std::isfinite(v)) throw Error(ErrorCode::EmptyInput, "trace value not finite");
    }
  }
}

TraceMatrix TraceMatrix::from_rotated(std::span<const RotatedSample> samples,
                                      std::optional<Label> label) {
  std::vector<double> x, y, z;
  x.reserve(samples.size());
  y.reserve(samples.size());
  z.reserve(samples.size());
  for (const auto& s : samples) {
    x.push_back(s.accel.x);
    y.push_back(s.accel.y);
    z.push_back(s.accel.z);
  }
  return TraceMatrix(std::move(x), std::move(y), std::move(z), std::move(label));
}

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    const DtwOptions& options) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "dtw on empty sequence");
  // Keep the inner loop over the shorter sequence; the result is symmetric.
  if (b.size() > a.size()) std::swap(a, b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();

  std::size_t radius = std::max(n, m);
  if (options.band_fraction) {
    const double frac = *options.band_fraction;
    if (!(frac >= 0.0)) throw Error(ErrorCode::Configuration, "band fraction must be >= 0");
    radius = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n)));
    radius = std::max(radius, n - m);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> curr(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    std::fill(curr.begin(), curr.end(), kInf);
    const std::size_t lo = i > radius ? i - radius : 1;
    const std::size_t hi = std::min(m, i + radius);
    for (std::size_t j = lo; j <= hi; ++j) {
      const double cost = std::abs(a[i - 1] - b[j - 1]);
      curr[j] = cost + std::min({prev[j - 1], prev[j], curr[j - 1]});
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

double total_distance(const TraceMatrix& a, const TraceMatrix& b, const DtwOptions& options) {
  return dtw_distance(a.x(), b.x(), options) + dtw_distance(a.y(), b.y(), options) +
         dtw_distance(a.z(), b.z(), options);
}

std::vector<Label> lowercase_alphabet() {
  std::vector<Label> out;
  for (char c = 'a'; c <= 'z'; ++c) out.emplace_back(1, c);
  return out;
}

TemplateSet::TemplateSet(std::vector<Label> alphabet) : alphabet_(std::move(alphabet)) {
  if (alphabet_.empty()) throw Error(ErrorCode::Alphabet, "alphabet is empty");
  std::set<Label> seen;
  for (const auto& l : alphabet_) {
    if (l.empty()) throw Error(ErrorCode::Alphabet, "empty label in alphabet");
    if (!seen.insert(l).second) throw Error(ErrorCode::Alphabet, "duplicate label '" + l + "'");
  }
}

bool TemplateSet::contains(const Label& letter) const { return templates_.count(letter) > 0; }

std::vector<Label> TemplateSet::missing() const {
  std::vector<Label> out;
  for (const auto& l : alphabet_) {
    if (!contains(l)) out.push_back(l);
  }
  return out;
}

TemplateSet TemplateSet::train(const Label& letter, TraceMatrix trace) const {
  if (std::find(alphabet_.begin(), alphabet_.end(), letter) == alphabet_.end()) {
    throw Error(ErrorCode::Alphabet, "label '" + letter + "' is not in the alphabet");
  }
  TemplateSet next = *this;
  if (trace.label() != letter) {
    trace = TraceMatrix({trace.x().begin(), trace.x().end()}, {trace.y().begin(), trace.y().end()},
                        {trace.z().begin(), trace.z().end()}, letter);
  }
  next.templates_.insert_or_assign(letter, std::move(trace));
  return next;
}

Prediction classify(const TemplateSet& set, const TraceMatrix& trace, const DtwOptions& options) {
  if (!set.complete()) {
    std::string msg = "template set incomplete, missing:";
    for (const auto& l : set.missing()) msg += " " + l;
    throw Error(ErrorCode::NotTrained, msg);
  }
  Prediction p;
  p.ranked.reserve(set.alphabet().size());
  for (const auto& letter : set.alphabet()) {
    p.ranked.push_back({letter, total_distance(set.templates().at(letter), trace, options)});
  }
  // Stable sort keeps alphabet order on exact ties.
  std::stable_sort(p.ranked.begin(), p.ranked.end(),
                   [](const RankedLabel& l, const RankedLabel& r) { return l.distance < r.distance; });
  p.letter = p.ranked.front().label;
  return p;
}

nlohmann::json to_json(const TemplateSet& set) {
  nlohmann::json templates = nlohmann::json::object();
  for (const auto& [letter, trace] : set.templates()) {
    templates[letter] = {{"x", std::vector<double>(trace.x().begin(), trace.x().end())},
                         {"y", std::vector<double>(trace.y().begin(), trace.y().end())},
                         {"z", std::vector<double>(trace.z().begin(), trace.z().end())}};
  }
  return {{"schema", 1}, {"alphabet", set.alphabet()}, {"templates", templates}};
}

TemplateSet template_set_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<int>() != 1) {
      throw Error(ErrorCode::Parse, "unsupported template schema");
    }
    TemplateSet set(doc.at("alphabet").get<std::vector<Label>>());
    for (const auto& [letter, axes] : doc.at("templates").items()) {
      set = set.train(letter, TraceMatrix(axes.at("x").get<std::vector<double>>(),
                                          axes.at("y").get<std::vector<double>>(),
                                          axes.at("z").get<std::vector<double>>(), letter));
    }
    return set;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("template file: ") + e.what());
  }
}

TemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open template file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "template file " + path.string() + ": " + e.what());
  }
  return template_set_from_json(doc);
}

void save_templates(const TemplateSet& set, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Parse, "cannot write " + tmp.string());
    out << to_json(set).dump() << '\n';
    if (!out) throw Error(ErrorCode::Parse, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json to_json(const Prediction& prediction) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& r : prediction.ranked) {
    ranked.push_back({{"letter", r.label}, {"distance", r.distance}});
  }
  return {{"letter", prediction.letter}, {"ranked", ranked}};
}

}  // namespace airdraw
