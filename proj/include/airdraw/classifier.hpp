#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "airdraw/orientation.hpp"

namespace airdraw {

using Label = std::string;

/// Rotated 3-axis acceleration of one session, the unit compared by DTW.
class TraceMatrix {
 public:
  /// Throws Error(EmptyInput) unless all axes share one length >= 2 and every
  /// value is finite.
  TraceMatrix(std::vector<double> x, std::vector<double> y, std::vector<double> z,
              std::optional<Label> label = std::nullopt);

  static TraceMatrix from_rotated(std::span<const RotatedSample> samples,
                                  std::optional<Label> label = std::nullopt);

  std::size_t length() const { return x_.size(); }
  std::span<const double> x() const { return x_; }
  std::span<const double> y() const { return y_; }
  std::span<const double> z() const { return z_; }
  const std::optional<Label>& label() const { return label_; }

  friend bool operator==(const TraceMatrix&, const TraceMatrix&) = default;

 private:
  std::vector<double> x_, y_, z_;
  std::optional<Label> label_;
};

struct DtwOptions {
  /// Sakoe-Chiba radius as a fraction of the longer sequence. Unset means an
  /// unconstrained warping path.
  std::optional<double> band_fraction;
};

/// Classic DTW: local cost |a_i - b_j|, steps (1,0) (0,1) (1,1), both
/// endpoints matched, summed cost without normalization.
double dtw_distance(std::span<const double> a, std::span<const double> b,
                    const DtwOptions& options = {});

/// Sum of the independent per-axis DTW distances.
double total_distance(const TraceMatrix& a, const TraceMatrix& b, const DtwOptions& options = {});

std::vector<Label> lowercase_alphabet();

/// One template per letter. Instances are immutable; train() returns a new
/// set, so a shared const set may be read from many threads.
class TemplateSet {
 public:
  /// Throws Error(Alphabet) on an empty or duplicated alphabet.
  explicit TemplateSet(std::vector<Label> alphabet = lowercase_alphabet());

  const std::vector<Label>& alphabet() const { return alphabet_; }
  const std::map<Label, TraceMatrix>& templates() const { return templates_; }
  std::size_t size() const { return templates_.size(); }
  bool contains(const Label& letter) const;
  bool complete() const { return templates_.size() == alphabet_.size(); }
  std::vector<Label> missing() const;

  /// Throws Error(Alphabet) if the letter is not in the alphabet.
  TemplateSet train(const Label& letter, TraceMatrix trace) const;

 private:
  std::vector<Label> alphabet_;
  std::map<Label, TraceMatrix> templates_;
};

struct RankedLabel {
  Label label;
  double distance = 0.0;

  friend bool operator==(const RankedLabel&, const RankedLabel&) = default;
};

struct Prediction {
  Label letter;
  std::vector<RankedLabel> ranked;  // ascending distance, alphabet order on ties

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Nearest template by total distance. Throws Error(NotTrained) unless the
/// set is complete.
Prediction classify(const TemplateSet& set, const TraceMatrix& trace, const DtwOptions& options = {});

// Template file: {"schema": 1, "alphabet": [...], "templates": {"a": {"x": [...], "y": [...], "z": [...]}}}
nlohmann::json to_json(const TemplateSet& set);
TemplateSet template_set_from_json(const nlohmann::json& doc);

TemplateSet load_templates(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over the target.
void save_templates(const TemplateSet& set, const std::filesystem::path& path);

nlohmann::json to_json(const Prediction& prediction);

}  // namespace airdraw
