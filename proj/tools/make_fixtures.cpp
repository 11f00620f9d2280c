// Regenerates the golden files under tests/fixtures from fixed seeds.
//   make_fixtures <output-dir>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "airdraw/eval.hpp"
#include "airdraw/pipeline.hpp"
#include "airdraw/stream_session.hpp"
#include "airdraw/synth.hpp"
#include "airdraw/trace_io.hpp"

using namespace airdraw;

namespace {

constexpr double kPadRateHz = 60.0;

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::ordered_json>& msgs) {
  std::ofstream out(path, std::ios::trunc);
  for (const auto& m : msgs) out << m.dump() << '\n';
}

std::vector<nlohmann::ordered_json> pad_word(std::string_view word, std::uint64_t seed) {
  std::vector<nlohmann::ordered_json> all;
  double t0 = 0.0;
  for (char c : word) {
    auto msgs = pad_recording(letter_path(Label(1, c)), 1.5, kPadRateHz, seed++, t0);
    t0 = msgs.back()["t_ms"].get<double>() + 50.0;
    all.insert(all.end(), msgs.begin(), msgs.end());
  }
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);

  SynthSpec spec;
  spec.noise_sigma = 0.2;
  spec.seed = 7;
  write_trace_file(dir / "jaw_trace.jsonl", synthesize_word("jaw", spec, 1000.0));

  TemplateSet synth_set;
  std::uint64_t seed = 100;
  for (const auto& l : lowercase_alphabet()) {
    spec.seed = seed++;
    synth_set = synth_set.train(l, extract_letter(synthesize(letter_path(l), spec), PipelineConfig{}, l));
  }
  save_templates(synth_set, dir / "synth_templates.json");

  const auto pad_path = dir / "pad_templates.json";
  std::filesystem::remove(pad_path);
  auto store = std::make_shared<TemplateStore>(TemplateSet{}, pad_path);
  seed = 1000;
  for (const auto& l : lowercase_alphabet()) {
    StreamSession session(ServiceConfig{}, store);
    session.handle(R"({"v":1,"kind":"set_config","mode":"template"})");
    session.handle(R"({"v":1,"kind":"begin_template","letter":")" + l + "\"}");
    bool saved = false;
    for (const auto& m : pad_recording(letter_path(l), 1.5, kPadRateHz, seed++)) {
      for (const auto& out : session.handle(m.dump()).messages) saved = saved || out["kind"] == "template_saved";
    }
    if (!saved) {
      std::cerr << "no template saved for '" << l << "'\n";
      return 3;
    }
  }

  write_jsonl(dir / "z_pad.jsonl", pad_word("z", 2001));
  write_jsonl(dir / "cake_pad.jsonl", pad_word("cake", 3005));
  return 0;
}
