#include "airdraw/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

#include "airdraw/error.hpp"

namespace airdraw {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (a + 1)) ^ (0xc2b2ae3d27d4eb4fULL * (b + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string percent_cell(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", pct);
  return buf;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_percent(const std::string& cell) {
  std::string t = trim(cell);
  if (!t.empty() && t.back() == '%') t.pop_back();
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw Error(ErrorCode::Parse, "bad percentage '" + cell + "'");
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::Parse, "bad percentage '" + cell + "'");
  }
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::vector<Label> alphabet)
    : alphabet_(std::move(alphabet)), counts_(alphabet_.size() * alphabet_.size(), 0) {}

std::int64_t ConfusionMatrix::at(std::size_t actual, std::size_t predicted) const {
  return counts_.at(actual * alphabet_.size() + predicted);
}

std::int64_t ConfusionMatrix::row_sum(std::size_t actual) const {
  std::int64_t sum = 0;
  for (std::size_t j = 0; j < alphabet_.size(); ++j) sum += at(actual, j);
  return sum;
}

std::size_t ConfusionMatrix::index_of(const Label& label) const {
  auto it = std::find(alphabet_.begin(), alphabet_.end(), label);
  if (it == alphabet_.end()) throw Error(ErrorCode::Alphabet, "label '" + label + "' not in matrix");
  return static_cast<std::size_t>(it - alphabet_.begin());
}

void ConfusionMatrix::add(const Label& actual, const Label& predicted, std::int64_t count) {
  counts_[index_of(actual) * alphabet_.size() + index_of(predicted)] += count;
}

Accuracy accuracy(const ConfusionMatrix& m) {
  Accuracy acc;
  double sum = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto row = m.row_sum(i);
    if (row <= 0) {
      throw Error(ErrorCode::IncompleteExperiment, "no trials for '" + m.alphabet()[i] + "'");
    }
    const double a = static_cast<double>(m.at(i, i)) / static_cast<double>(row);
    acc.per_letter.emplace_back(m.alphabet()[i], a);
    sum += a;
  }
  acc.mean = m.size() > 0 ? sum / static_cast<double>(m.size()) : 0.0;
  return acc;
}

std::string report(const ConfusionMatrix& m, ReportFormat format) {
  const std::size_t n = m.size();
  bool complete = n > 0;
  for (std::size_t i = 0; i < n; ++i) complete = complete && m.row_sum(i) > 0;

  auto cell = [&](std::size_t i, std::size_t j) {
    const auto row = m.row_sum(i);
    const double pct = row > 0 ? 100.0 * static_cast<double>(m.at(i, j)) / static_cast<double>(row) : 0.0;
    return percent_cell(pct);
  };
  const std::string mean = complete ? percent_cell(100.0 * accuracy(m).mean) : "n/a";

  std::ostringstream out;
  if (format == ReportFormat::Csv) {
    out << "actual\\predicted";
    for (const auto& l : m.alphabet()) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      out << m.alphabet()[i];
      for (std::size_t j = 0; j < n; ++j) out << ',' << cell(i, j);
      out << '\n';
    }
    out << "mean accuracy," << mean << '\n';
  } else {
    out << "| actual \\ predicted |";
    for (const auto& l : m.alphabet()) out << ' ' << l << " |";
    out << "\n|---|";
    for (std::size_t j = 0; j < n; ++j) out << "---|";
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
      out << "| " << m.alphabet()[i] << " |";
      for (std::size_t j = 0; j < n; ++j) out << ' ' << cell(i, j) << " |";
      out << '\n';
    }
    out << "\nMean accuracy: " << mean << '\n';
  }
  return out.str();
}

PercentTable parse_report(std::string_view text) {
  PercentTable table;
  std::vector<std::string> lines;
  for (auto& l : split(text, '\n')) {
    if (!trim(l).empty()) lines.push_back(trim(l));
  }
  if (lines.empty()) throw Error(ErrorCode::Parse, "empty report");

  auto read_mean = [&](const std::string& value) {
    if (trim(value) != "n/a") table.mean_percent = parse_percent(value);
  };

  const bool markdown = lines.front().front() == '|';
  if (!markdown) {
    auto header = split(lines.front(), ',');
    if (header.front() != "actual\\predicted") throw Error(ErrorCode::Parse, "missing report header");
    table.alphabet.assign(header.begin() + 1, header.end());
    for (std::size_t k = 1; k < lines.size(); ++k) {
      auto cells = split(lines[k], ',');
      if (cells.front() == "mean accuracy") {
        if (cells.size() != 2) throw Error(ErrorCode::Parse, "bad footer");
        read_mean(cells[1]);
        continue;
      }
      if (cells.size() != table.alphabet.size() + 1) throw Error(ErrorCode::Parse, "ragged row");
      std::vector<double> row;
      for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_percent(cells[j]));
      table.percent.push_back(std::move(row));
    }
  } else {
    auto cells_of = [](const std::string& line) {
      auto parts = split(line, '|');
      std::vector<std::string> cells;
      for (std::size_t i = 1; i + 1 < parts.size(); ++i) cells.push_back(trim(parts[i]));
      return cells;
    };
    auto header = cells_of(lines.front());
    if (header.empty() || header.front() != "actual \\ predicted") {
      throw Error(ErrorCode::Parse, "missing report header");
    }
    table.alphabet.assign(header.begin() + 1, header.end());
    for (std::size_t k = 1; k < lines.size(); ++k) {
      const auto& line = lines[k];
      if (line.rfind("Mean accuracy:", 0) == 0) {
        read_mean(line.substr(std::string("Mean accuracy:").size()));
        continue;
      }
      if (line.rfind("|---", 0) == 0) continue;
      auto cells = cells_of(line);
      if (cells.size() != table.alphabet.size() + 1) throw Error(ErrorCode::Parse, "ragged row");
      std::vector<double> row;
      for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_percent(cells[j]));
      table.percent.push_back(std::move(row));
    }
  }
  if (table.percent.size() != table.alphabet.size()) {
    throw Error(ErrorCode::Parse, "row count does not match header");
  }
  return table;
}

SynthRanges SynthRanges::writer_variation() {
  SynthRanges r;
  r.duration_min_s = 1.3;
  r.duration_max_s = 1.7;
  r.theta_min_rad = -40.0 * std::numbers::pi / 180.0;
  r.theta_max_rad = 40.0 * std::numbers::pi / 180.0;
  r.size_jitter = 0.1;
  r.shape_jitter = 0.08;
  r.timing_jitter = 0.2;
  return r;
}

void ExperimentSpec::validate() const {
  if (letters.empty()) throw Error(ErrorCode::Configuration, "experiment needs at least one letter");
  if (trials_per_letter < 1) throw Error(ErrorCode::Configuration, "trials per letter must be >= 1");
  if (template_seed == test_seed) {
    throw Error(ErrorCode::Configuration, "template and test seeds must differ");
  }
  for (const auto& l : letters) letter_path(l);
  synth.validate();
  pipeline.validate();
  if (ranges.duration_min_s > ranges.duration_max_s || ranges.theta_min_rad > ranges.theta_max_rad) {
    throw Error(ErrorCode::Configuration, "empty synthesis range");
  }
}

std::vector<SensorSample> draw_trace(const Label& letter, const SynthSpec& base,
                                     const SynthRanges& ranges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  SynthSpec spec = base;
  spec.duration_s = uniform(ranges.duration_min_s, ranges.duration_max_s);
  spec.set_theta(uniform(ranges.theta_min_rad, ranges.theta_max_rad));
  spec.letter_size_m = base.letter_size_m * uniform(1.0 - ranges.size_jitter, 1.0 + ranges.size_jitter);
  spec.timing_jitter = ranges.timing_jitter;
  spec.seed = rng();
  const StrokePath& path = letter_path(letter);
  if (ranges.shape_jitter > 0.0) return synthesize(perturb_path(path, ranges.shape_jitter, rng), spec);
  return synthesize(path, spec);
}

TraceMatrix extract_letter(std::span<const SensorSample> raw, const PipelineConfig& config,
                           std::optional<Label> label) {
  const auto run = run_pipeline(raw, config);
  const SessionResult* best = nullptr;
  for (const auto& s : run.sessions) {
    if (s.rotated.size() >= 2 && (!best || s.rotated.size() > best->rotated.size())) best = &s;
  }
  if (best) return TraceMatrix::from_rotated(best->rotated, std::move(label));
  const auto smoothed = smooth(raw, config.filter, Channel::Both);
  return TraceMatrix::from_rotated(rotate_trace(smoothed, config.angle_mode), std::move(label));
}

ConfusionMatrix run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const auto& letters = spec.letters;

  TemplateSet templates(letters);
  for (std::size_t i = 0; i < letters.size(); ++i) {
    const auto raw = draw_trace(letters[i], spec.synth, spec.ranges, derive_seed(spec.template_seed, i, 0));
    templates = templates.train(letters[i], extract_letter(raw, spec.pipeline, letters[i]));
  }

  const std::size_t trials = static_cast<std::size_t>(spec.trials_per_letter);
  const std::size_t jobs = letters.size() * trials;
  std::vector<std::size_t> predicted(jobs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      try {
        const std::size_t li = job / trials;
        const std::size_t trial = job % trials;
        const auto raw = draw_trace(letters[li], spec.synth, spec.ranges,
                                    derive_seed(spec.test_seed, li, trial + 1));
        const auto p = classify(templates, extract_letter(raw, spec.pipeline), spec.pipeline.dtw);
        predicted[job] = static_cast<std::size_t>(
            std::find(letters.begin(), letters.end(), p.letter) - letters.begin());
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs;
      }
    }
  };

  unsigned threads = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ConfusionMatrix m(letters);
  for (std::size_t job = 0; job < jobs; ++job) m.add(letters[job / trials], letters[predicted[job]]);
  return m;
}

std::vector<WordSavings> savings_table(std::span<const std::string> words, const SynthSpec& spec,
                                       double gap_ms, const PipelineConfig& config,
                                       int repetitions) {
  if (repetitions < 1) throw Error(ErrorCode::Configuration, "repetitions must be >= 1");
  std::vector<WordSavings> rows;
  for (std::size_t w = 0; w < words.size(); ++w) {
    WordSavings row;
    row.word = words[w];
    for (int r = 0; r < repetitions; ++r) {
      SynthSpec s = spec;
      s.seed = derive_seed(spec.seed, w, static_cast<std::uint64_t>(r));
      const auto trace = synthesize_word(words[w], s, gap_ms);
      const auto ledger = run_pipeline(trace, config).ledger;
      row.continuous += static_cast<double>(ledger.continuous_count);
      row.gated += static_cast<double>(ledger.gated_count);
    }
    row.continuous /= repetitions;
    row.gated /= repetitions;
    row.percent = savings(row.continuous, row.gated);
    rows.push_back(row);
  }
  return rows;
}

std::string savings_csv(std::span<const WordSavings> rows) {
  std::ostringstream out;
  auto number = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return std::string(buf);
  };
  out << "connection";
  for (const auto& r : rows) out << ',' << r.word;
  out << "\ncontinuous";
  for (const auto& r : rows) out << ',' << number(r.continuous);
  out << "\nduring_active_sessions";
  for (const auto& r : rows) out << ',' << number(r.gated);
  out << "\nsavings";
  for (const auto& r : rows) out << ',' << number(r.percent) << '%';
  out << '\n';
  return out.str();
}

}  // namespace airdraw
