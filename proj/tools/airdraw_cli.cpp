// airdraw: command-line front end for synthesis, pipeline runs, training,
// classification, evaluation and the streaming service.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "airdraw/classifier.hpp"
#include "airdraw/error.hpp"
#include "airdraw/eval.hpp"
#include "airdraw/pipeline.hpp"
#include "airdraw/stream_server.hpp"
#include "airdraw/stream_session.hpp"
#include "airdraw/synth.hpp"
#include "airdraw/trace_io.hpp"

namespace {

using namespace airdraw;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Pipeline options shared by pipeline/train/classify/eval/serve. A config
/// file is applied first and explicit flags win.
struct PipelineFlags {
  std::string config_path;
  std::vector<double> weights;
  double threshold = 0.0;
  double hold_ms = 0.0;
  double band = -1.0;
  std::string angle_mode;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* hold_opt = nullptr;
  CLI::Option* band_opt = nullptr;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "TOML-style pipeline config file")->check(CLI::ExistingFile);
    app->add_option("--weights", weights, "Filter weights, oldest to newest (default 1 2 3 4 5)");
    threshold_opt = app->add_option("--threshold", threshold, "Session start threshold, m/s^2 (default 1.0)");
    hold_opt = app->add_option("--hold-ms", hold_ms, "Quiet time that ends a session, ms (default 400)");
    band_opt = app->add_option("--band", band, "Sakoe-Chiba band as a fraction of length (default: none)")
                   ->check(CLI::Range(0.0, 1.0));
    app->add_option("--angle-mode", angle_mode, "per_sample or per_session")
        ->check(CLI::IsMember({"per_sample", "per_session"}));
  }

  PipelineConfig build() const {
    PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (!weights.empty()) cfg.filter = FilterSpec::from_weights(weights);
    if (threshold_opt->count()) cfg.session.threshold = threshold;
    if (hold_opt->count()) cfg.session.hold_ms = hold_ms;
    if (band_opt->count()) cfg.dtw.band_fraction = band;
    if (angle_mode == "per_sample") cfg.angle_mode = AngleMode::PerSample;
    if (angle_mode == "per_session") cfg.angle_mode = AngleMode::PerSession;
    cfg.validate();
    return cfg;
  }
};

std::vector<SensorSample> read_input(const std::string& path) {
  if (path.empty() || path == "-") return read_trace(std::cin);
  return read_trace_file(path);
}

/// Writes to a file or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error(ErrorCode::Parse, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

TemplateSet load_or_fresh(const std::string& path) {
  if (!path.empty() && std::filesystem::exists(path)) return load_templates(path);
  return TemplateSet(lowercase_alphabet());
}

void print_warnings(const std::vector<QualityWarning>& warnings) {
  if (warnings.empty()) return;
  std::cerr << "warning: " << warnings.size() << " gravity quality warning(s); first at t_us="
            << warnings.front().t_us << ": " << warnings.front().message << '\n';
}

std::atomic<bool> g_interrupted{false};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Air-writing letter recognition from wrist motion sensors"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic sensor trace (JSONL)");
  std::string letter, word, out_path;
  double size_in = 12.0, noise = 0.0, gap_ms = 1000.0, theta_deg = 0.0, duration = 1.5, rate = 100.0;
  std::optional<double> theta_end_deg;
  std::uint64_t seed = 0;
  bool pad_log = false;
  auto* letter_opt = synth->add_option("--letter", letter, "Single letter a-z");
  auto* word_opt = synth->add_option("--word", word, "Word of letters a-z");
  letter_opt->excludes(word_opt);
  synth->add_option("--size-in", size_in, "Letter box size in inches")->check(CLI::PositiveNumber);
  synth->add_option("--noise", noise, "Gaussian noise sigma, m/s^2")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--gap-ms", gap_ms, "Quiet gap between letters of a word")->check(CLI::NonNegativeNumber);
  synth->add_option("--theta-deg", theta_deg, "Arm elevation in degrees");
  synth->add_option("--theta-end-deg", theta_end_deg, "Sweep the arm angle to this value over the trace");
  synth->add_option("--duration", duration, "Average letter writing time, s")->check(CLI::PositiveNumber);
  synth->add_option("--rate", rate, "Sample rate, Hz")->check(CLI::PositiveNumber);
  synth->add_option("--out", out_path, "Output file (default stdout)");
  synth->add_flag("--pad-log", pad_log, "Emit a drawing-pad pointer log (stream protocol) instead");

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "Segment, rotate and classify a trace");
  std::string in_path, templates_path, rotated_path;
  PipelineFlags pflags;
  pipeline->add_option("--in", in_path, "Input trace JSONL (default stdin)");
  pipeline->add_option("--templates", templates_path, "Template file; omit to skip classification");
  pipeline->add_option("--out", out_path, "Output JSONL (default stdout)");
  pflags.attach(pipeline);

  // train
  auto* train = app.add_subcommand("train", "Record a one-shot template for a letter");
  train->add_option("--letter", letter, "Letter to train")->required();
  train->add_option("--in", in_path, "Trace holding exactly one session (default stdin)");
  train->add_option("--templates", templates_path, "Template file to update")->required();
  PipelineFlags tflags;
  tflags.attach(train);

  // classify
  auto* classify_cmd = app.add_subcommand("classify", "Classify every session of a trace");
  classify_cmd->add_option("--in", in_path, "Input trace JSONL (default stdin)");
  classify_cmd->add_option("--templates", templates_path, "Complete template file")->required();
  classify_cmd->add_option("--out", out_path, "Output JSONL (default stdout)");
  PipelineFlags cflags;
  cflags.attach(classify_cmd);

  // eval
  auto* eval = app.add_subcommand("eval", "Confusion-matrix experiment on synthetic traces");
  std::string letters = "abjwz", format = "markdown";
  int trials = 100, repetitions = 5;
  unsigned threads = 0;
  double eval_noise = 1.0;
  std::uint64_t eval_seed = 7;
  bool report_savings = false, no_variation = false;
  std::vector<std::string> words{"pizza", "chicken", "cake", "wine", "coffee"};
  eval->add_option("--letters", letters, "Letters to test");
  eval->add_option("--size-in", size_in, "Letter box size in inches")->check(CLI::PositiveNumber);
  eval->add_option("--trials", trials, "Test traces per letter")->check(CLI::PositiveNumber);
  auto* eval_noise_opt = eval->add_option("--noise", eval_noise,
                                          "Gaussian noise sigma, m/s^2 (default 1.0; 0 with --report-savings)")
                             ->check(CLI::NonNegativeNumber);
  eval->add_option("--seed", eval_seed, "Template seed; test traces use seed + 1");
  eval->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  eval->add_option("--threads", threads, "Worker threads (0: all cores)");
  eval->add_flag("--no-variation", no_variation, "Disable per-trial writer variation");
  eval->add_flag("--report-savings", report_savings, "Emit the per-word transfer savings table (CSV)");
  eval->add_option("--words", words, "Words for --report-savings");
  eval->add_option("--gap-ms", gap_ms, "Gap between letters for --report-savings");
  eval->add_option("--repetitions", repetitions, "Repetitions averaged per word")->check(CLI::PositiveNumber);
  PipelineFlags eflags;
  eflags.attach(eval);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the WebSocket stream service");
  std::string addr = "127.0.0.1";
  std::uint16_t port = 8080;
  double max_rate = 10000.0;
  serve->add_option("--addr", addr, "Listen address");
  serve->add_option("--port", port, "Listen port");
  serve->add_option("--templates", templates_path, "Template file (created and updated on save)");
  serve->add_option("--size-in", size_in, "Default letter box size in inches")->check(CLI::PositiveNumber);
  serve->add_option("--max-rate", max_rate, "Max client frames per second")->check(CLI::PositiveNumber);
  PipelineFlags sflags;
  sflags.attach(serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) {
      if (letter.empty() == word.empty()) {
        std::cerr << "synth: exactly one of --letter or --word is required\n";
        return kExitUsage;
      }
      SynthSpec spec;
      spec.letter_size_m = size_in * kInchesToMeters;
      spec.noise_sigma = noise;
      spec.seed = seed;
      spec.duration_s = duration;
      spec.sample_rate_hz = rate;
      spec.theta_start_rad = deg_to_rad(theta_deg);
      spec.theta_end_rad = deg_to_rad(theta_end_deg.value_or(theta_deg));
      Output out(out_path);
      const std::string text = letter.empty() ? word : letter;
      if (pad_log) {
        double t0 = 0.0;
        for (char c : text) {
          const auto msgs = pad_recording(letter_path(Label(1, c)), duration, 60.0, seed++, t0);
          for (const auto& m : msgs) out.stream() << m.dump() << '\n';
          t0 = msgs.back()["t_ms"].get<double>() + 50.0;
        }
        return 0;
      }
      const auto trace = letter.empty() ? synthesize_word(word, spec, gap_ms)
                                        : synthesize(letter_path(letter), spec);
      write_trace(out.stream(), trace);
      return 0;
    }

    if (*pipeline || *classify_cmd) {
      const bool full = pipeline->parsed();
      PipelineConfig cfg = (full ? pflags : cflags).build();
      if (!templates_path.empty()) cfg.templates = templates_path;
      std::shared_ptr<const TemplateSet> templates;
      if (cfg.templates) templates = std::make_shared<const TemplateSet>(load_templates(*cfg.templates));
      const auto raw = read_input(in_path);
      const auto run = run_pipeline(raw, cfg, templates);
      print_warnings(run.warnings);
      Output out(out_path);
      for (const auto& s : run.sessions) {
        if (full) {
          out.stream() << to_json(s).dump() << '\n';
          continue;
        }
        nlohmann::ordered_json rec;
        rec["session"] = s.index;
        rec["t_start_us"] = s.t_start_us;
        rec["t_end_us"] = s.t_end_us;
        rec["prediction"] = s.prediction ? nlohmann::ordered_json(to_json(*s.prediction)) : nullptr;
        out.stream() << rec.dump() << '\n';
      }
      return 0;
    }

    if (*train) {
      const PipelineConfig cfg = tflags.build();
      const auto raw = read_input(in_path);
      const auto run = run_pipeline(raw, cfg);
      if (run.sessions.size() != 1) {
        throw Error(ErrorCode::AmbiguousTraining,
                    "training trace must hold exactly one session, found " + std::to_string(run.sessions.size()));
      }
      const auto& session = run.sessions.front();
      if (session.rotated.size() < 2) throw Error(ErrorCode::AmbiguousTraining, "session too short to train");
      const TemplateSet updated =
          load_or_fresh(templates_path).train(letter, TraceMatrix::from_rotated(session.rotated, letter));
      save_templates(updated, templates_path);
      std::cerr << "trained '" << letter << "' (" << updated.size() << "/" << updated.alphabet().size()
                << " letters)\n";
      return 0;
    }

    if (*eval) {
      const PipelineConfig cfg = eflags.build();
      SynthSpec base;
      base.letter_size_m = size_in * kInchesToMeters;
      base.noise_sigma = eval_noise;
      base.seed = eval_seed;
      if (report_savings) {
        if (!eval_noise_opt->count()) base.noise_sigma = 0.0;
        std::cout << savings_csv(savings_table(words, base, gap_ms, cfg, repetitions));
        return 0;
      }
      ExperimentSpec spec;
      for (char c : letters) spec.letters.emplace_back(1, c);
      spec.trials_per_letter = trials;
      spec.synth = base;
      spec.ranges = no_variation ? SynthRanges{} : SynthRanges::writer_variation();
      spec.template_seed = eval_seed;
      spec.test_seed = eval_seed + 1;
      spec.pipeline = cfg;
      spec.threads = threads;
      const auto matrix = run_experiment(spec);
      std::cout << report(matrix, format == "csv" ? ReportFormat::Csv : ReportFormat::Markdown);
      return 0;
    }

    if (*serve) {
      ServiceConfig config;
      config.pipeline = sflags.build();
      config.letter_size_m = size_in * kInchesToMeters;
      config.max_messages_per_s = max_rate;
      std::optional<std::filesystem::path> persist;
      if (!templates_path.empty()) persist = templates_path;
      auto store = std::make_shared<TemplateStore>(load_or_fresh(templates_path), persist);
      StreamServer server(config, store);
      const auto bound = server.start(addr, port);
      std::cerr << "listening on " << addr << ":" << bound << " (ws /v1/stream, GET /v1/health)\n";
      std::signal(SIGINT, [](int) { g_interrupted = true; });
      std::signal(SIGTERM, [](int) { g_interrupted = true; });
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::Configuration ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
