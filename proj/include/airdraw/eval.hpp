#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "airdraw/classifier.hpp"
#include "airdraw/pipeline.hpp"
#include "airdraw/synth.hpp"

namespace airdraw {

/// Rows are the actual letter, columns the predicted letter.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<Label> alphabet = {});

  const std::vector<Label>& alphabet() const { return alphabet_; }
  std::size_t size() const { return alphabet_.size(); }
  std::int64_t at(std::size_t actual, std::size_t predicted) const;
  std::int64_t row_sum(std::size_t actual) const;

  /// Throws Error(Alphabet) for labels outside the alphabet.
  void add(const Label& actual, const Label& predicted, std::int64_t count = 1);
  std::size_t index_of(const Label& label) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::vector<Label> alphabet_;
  std::vector<std::int64_t> counts_;  // row-major
};

struct Accuracy {
  std::vector<std::pair<Label, double>> per_letter;  // fractions in [0, 1]
  double mean = 0.0;                                 // unweighted over letters
};

/// Throws Error(IncompleteExperiment) when any row is empty.
Accuracy accuracy(const ConfusionMatrix& m);

enum class ReportFormat { Csv, Markdown };

/// Row-normalized percentages with one decimal and a mean-accuracy footer.
std::string report(const ConfusionMatrix& m, ReportFormat format);

struct PercentTable {
  std::vector<Label> alphabet;
  std::vector<std::vector<double>> percent;
  std::optional<double> mean_percent;
};

/// Reads back either report format. Throws Error(Parse).
PercentTable parse_report(std::string_view text);

/// Per-trial variation drawn uniformly around the base SynthSpec.
struct SynthRanges {
  double duration_min_s = 1.5;
  double duration_max_s = 1.5;
  double theta_min_rad = 0.0;
  double theta_max_rad = 0.0;
  double size_jitter = 0.0;   // relative, letter size * U[1 - j, 1 + j]
  double shape_jitter = 0.0;  // affine distortion magnitude, see perturb_path
  double timing_jitter = 0.0;

  /// Moderate writer variability used by the CLI and the acceptance runs.
  static SynthRanges writer_variation();
};

struct ExperimentSpec {
  std::vector<Label> letters;
  int trials_per_letter = 100;
  SynthSpec synth;
  SynthRanges ranges;
  std::uint64_t template_seed = 1;
  std::uint64_t test_seed = 2;
  PipelineConfig pipeline;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// One sample trace for a trial: letter path, perturbed and timed per the
/// ranges, with all randomness derived from `seed`.
std::vector<SensorSample> draw_trace(const Label& letter, const SynthSpec& base,
                                     const SynthRanges& ranges, std::uint64_t seed);

/// Runs the wear and mobile stages on a single-letter trace and returns the
/// rotated matrix of its longest session (the whole trace when no session
/// is detected).
TraceMatrix extract_letter(std::span<const SensorSample> raw, const PipelineConfig& config,
                           std::optional<Label> label = std::nullopt);

/// Trains one template per letter from template_seed traces, then classifies
/// trials_per_letter independent test traces per letter. Deterministic for a
/// given spec regardless of thread count.
ConfusionMatrix run_experiment(const ExperimentSpec& spec);

struct WordSavings {
  std::string word;
  double continuous = 0.0;  // mean samples over repetitions
  double gated = 0.0;
  double percent = 0.0;
};

/// Synthesizes each word `repetitions` times (seeds derived from spec.seed),
/// runs the wear stage and averages the transfer counts.
std::vector<WordSavings> savings_table(std::span<const std::string> words, const SynthSpec& spec,
                                       double gap_ms, const PipelineConfig& config,
                                       int repetitions = 5);

/// CSV with one column per word and rows continuous / gated / savings.
std::string savings_csv(std::span<const WordSavings> rows);

}  // namespace airdraw
