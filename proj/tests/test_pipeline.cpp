#include <doctest.h>

#include "airdraw/error.hpp"
#include "airdraw/eval.hpp"
#include "airdraw/pipeline.hpp"
#include "airdraw/synth.hpp"

using namespace airdraw;

namespace {

std::shared_ptr<const TemplateSet> seeded_templates(double noise) {
  SynthSpec spec;
  spec.noise_sigma = noise;
  TemplateSet set;
  std::uint64_t seed = 100;
  for (const auto& l : lowercase_alphabet()) {
    spec.seed = seed++;
    set = set.train(l, extract_letter(synthesize(letter_path(l), spec), PipelineConfig{}, l));
  }
  return std::make_shared<const TemplateSet>(std::move(set));
}

}  // namespace

TEST_CASE("a synthesized letter yields one session classified correctly") {
  const auto templates = seeded_templates(0.2);
  SynthSpec spec;
  spec.noise_sigma = 0.2;
  spec.seed = 9;
  spec.set_theta(0.4);
  for (const char* l : {"a", "k", "s", "z"}) {
    const auto run = run_pipeline(synthesize(letter_path(l), spec), PipelineConfig{}, templates);
    REQUIRE(run.sessions.size() == 1);
    REQUIRE(run.sessions[0].prediction);
    CHECK(run.sessions[0].prediction->letter == l);
    CHECK(run.sessions[0].prediction->ranked.size() == 26);
  }
}

TEST_CASE("without templates sessions carry no prediction") {
  const auto run = run_pipeline(synthesize_word("wine", SynthSpec{}, 1000), PipelineConfig{});
  REQUIRE(run.sessions.size() == 4);
  for (std::size_t i = 0; i < run.sessions.size(); ++i) {
    const auto& s = run.sessions[i];
    CHECK(s.index == i);
    CHECK_FALSE(s.prediction);
    CHECK(s.t_start_us <= s.t_last_us);
    CHECK(s.t_end_us - s.t_last_us > 400000);
    CHECK(s.rotated.front().t_us == s.t_start_us);
    CHECK(s.rotated.back().t_us == s.t_last_us);
  }
  CHECK(run.ledger.continuous_count > run.ledger.gated_count);
}

TEST_CASE("an incomplete template set is refused") {
  const auto partial = std::make_shared<const TemplateSet>(TemplateSet().train("a", TraceMatrix({1, 2}, {1, 2}, {1, 2})));
  try {
    run_pipeline(synthesize(letter_path("a"), SynthSpec{}), PipelineConfig{}, partial);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotTrained);
  }
}

TEST_CASE("wear stage ledger agrees with the batch run") {
  SynthSpec spec;
  spec.noise_sigma = 0.3;
  const auto trace = synthesize_word("cake", spec, 1000);
  const PipelineConfig cfg;
  WearStage wear(cfg);
  int ends = 0;
  for (const auto& s : trace) {
    if (auto ev = wear.push(s); ev && ev->kind == SessionEventKind::End) ++ends;
  }
  if (auto ev = wear.finish(); ev && ev->kind == SessionEventKind::End) ++ends;
  const auto run = run_pipeline(trace, cfg);
  CHECK(ends == static_cast<int>(run.sessions.size()));
  CHECK(wear.ledger().continuous_count == static_cast<std::int64_t>(trace.size()));
  CHECK(wear.ledger().gated_count == run.ledger.gated_count);
  CHECK(wear.state() == SessionState::Idle);
}

TEST_CASE("mobile stage notes degenerate sessions") {
  TemplateSet set;
  for (const auto& l : lowercase_alphabet()) set = set.train(l, TraceMatrix({0, 1}, {0, 1}, {0, 1}));
  const MobileStage mobile(PipelineConfig{}, std::make_shared<const TemplateSet>(set));
  SessionEvent end{SessionEventKind::End, 10, {}};
  CHECK(mobile.process(end, 0).note == "empty");
  end.trace = {{0, {2, 0, 0}, {0, -9.8, 0}}};
  CHECK(mobile.process(end, 1).note == "too_short");
  end.trace = {{0, {2, 0, 0}, {0, 0, 9.8}}, {1, {2, 0, 0}, {0, 0, 9.8}}};
  CHECK(mobile.process(end, 2).note == "indeterminate_angle");
}

TEST_CASE("session json layout") {
  const auto run = run_pipeline(synthesize(letter_path("l"), SynthSpec{}), PipelineConfig{}, seeded_templates(0.0));
  REQUIRE(run.sessions.size() == 1);
  const auto j = to_json(run.sessions[0]);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"session", "t_start_us", "t_last_us", "t_end_us", "n_samples", "rotated",
                                         "prediction"});
  CHECK(j["rotated"]["x"].size() == j["n_samples"].get<std::size_t>());
  CHECK(j["prediction"]["letter"] == "l");
}

TEST_CASE("per-session angle mode also classifies") {
  PipelineConfig cfg;
  cfg.angle_mode = AngleMode::PerSession;
  SynthSpec spec;
  spec.set_theta(-0.5);
  const auto run = run_pipeline(synthesize(letter_path("m"), spec), cfg, seeded_templates(0.0));
  REQUIRE(run.sessions.size() == 1);
  CHECK(run.sessions[0].prediction->letter == "m");
}
