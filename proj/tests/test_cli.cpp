#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "airdraw/classifier.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = AIRDRAW_CLI;
const fs::path kFixtures = AIRDRAW_FIXTURES;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

struct Workdir {
  fs::path path;
  Workdir() {
    path = fs::temp_directory_path() / ("airdraw_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const Workdir& dir, const std::string& args) {
  const std::string err_file = dir / "stderr.txt";
  const std::string cmd = kCli + " " + args + " 2>" + err_file;
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_file);
  return r;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  Workdir dir;
  CHECK(run(dir, "").code == 2);
  CHECK(run(dir, "frobnicate").code == 2);
  CHECK(run(dir, "synth --letter a --bogus").code == 2);
  CHECK(run(dir, "synth").code == 2);
  CHECK(run(dir, "synth --letter a --word ab").code == 2);
  CHECK(run(dir, "pipeline --band 3").code == 2);
  const auto help = run(dir, "pipeline --help");
  CHECK(help.code == 0);
  for (const char* flag : {"--in", "--templates", "--out", "--config", "--threshold", "--hold-ms", "--weights",
                           "--band", "--angle-mode"}) {
    CHECK(help.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("pipeline output is byte-identical across runs") {
  Workdir dir;
  const std::string args = "pipeline --in " + (kFixtures / "jaw_trace.jsonl").string() + " --templates " +
                           (kFixtures / "synth_templates.json").string();
  const auto a = run(dir, args);
  const auto b = run(dir, args + " --out " + (dir / "b.jsonl"));
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == slurp(dir / "b.jsonl"));
  CHECK(count_lines(a.out) == 3);
  std::string text;
  std::istringstream lines(a.out);
  for (std::string line; std::getline(lines, line);) {
    text += nlohmann::json::parse(line)["prediction"]["letter"].get<std::string>();
  }
  CHECK(text == "jaw");
}

TEST_CASE("stdin and stdout compose") {
  Workdir dir;
  const std::string cmd = kCli + " synth --word ab --seed 3 | " + kCli + " pipeline > " + (dir / "p.jsonl");
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(count_lines(slurp(dir / "p.jsonl")) == 2);
}

TEST_CASE("synth is deterministic and writes files") {
  Workdir dir;
  const auto a = run(dir, "synth --letter a --size-in 12 --noise 0.2 --seed 7 --out " + (dir / "a.jsonl"));
  const auto b = run(dir, "synth --letter a --size-in 12 --noise 0.2 --seed 7");
  CHECK(a.code == 0);
  CHECK(slurp(dir / "a.jsonl") == b.out);
  CHECK(run(dir, "synth --letter A").code == 3);
  const auto pad = run(dir, "synth --word ab --pad-log");
  CHECK(pad.code == 0);
  CHECK(pad.out.find("\"kind\":\"stroke_point\"") != std::string::npos);
}

TEST_CASE("empty input has zero sessions; a corrupt line is named") {
  Workdir dir;
  std::ofstream(dir / "empty.jsonl").close();
  const auto empty = run(dir, "pipeline --in " + (dir / "empty.jsonl"));
  CHECK(empty.code == 0);
  CHECK(empty.out.empty());

  std::ofstream bad(dir / "bad.jsonl");
  bad << R"({"t_us":0,"la":[0,0,0],"g":[0,-9.8,0]})" << '\n'
      << R"({"t_us":1,"la":[0,0,0],"g":[0,-9.8,0]})" << '\n'
      << R"({"t_us":2,"la":[0,0],"g":[0,-9.8,0]})" << '\n';
  bad.close();
  const auto r = run(dir, "pipeline --in " + (dir / "bad.jsonl"));
  CHECK(r.code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(run(dir, "pipeline --in " + (dir / "missing.jsonl")).code == 3);
}

TEST_CASE("training builds a complete template file") {
  Workdir dir;
  const std::string templates = dir / "t.json";
  int seed = 40;
  for (char c = 'a'; c <= 'z'; ++c) {
    const std::string trace = dir / "letter.jsonl";
    REQUIRE(run(dir, std::string("synth --letter ") + c + " --seed " + std::to_string(seed++) + " --noise 0.1 --out " +
                         trace)
                .code == 0);
    REQUIRE(run(dir, std::string("train --letter ") + c + " --in " + trace + " --templates " + templates).code == 0);
  }
  const auto set = airdraw::load_templates(templates);
  CHECK(set.complete());

  SUBCASE("retraining replaces one entry only") {
    REQUIRE(run(dir, "synth --letter q --seed 999 --noise 0.3 --out " + (dir / "q.jsonl")).code == 0);
    REQUIRE(run(dir, "train --letter q --in " + (dir / "q.jsonl") + " --templates " + templates).code == 0);
    const auto after = airdraw::load_templates(templates);
    for (const auto& [l, t] : set.templates()) {
      if (l == "q") {
        CHECK_FALSE(after.templates().at(l) == t);
      } else {
        CHECK(after.templates().at(l) == t);
      }
    }
  }
  SUBCASE("classify uses the file") {
    REQUIRE(run(dir, "synth --letter k --seed 5 --noise 0.1 --out " + (dir / "k.jsonl")).code == 0);
    const auto r = run(dir, "classify --in " + (dir / "k.jsonl") + " --templates " + templates);
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["prediction"]["letter"] == "k");
  }
}

TEST_CASE("training needs exactly one session") {
  Workdir dir;
  REQUIRE(run(dir, "synth --word ab --out " + (dir / "ab.jsonl")).code == 0);
  const auto two = run(dir, "train --letter a --in " + (dir / "ab.jsonl") + " --templates " + (dir / "t.json"));
  CHECK(two.code == 3);
  CHECK(two.err.find("exactly one session") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "t.json"));
  std::ofstream(dir / "empty.jsonl").close();
  CHECK(run(dir, "train --letter a --in " + (dir / "empty.jsonl") + " --templates " + (dir / "t.json")).code == 3);
}

TEST_CASE("classify refuses an incomplete template file") {
  Workdir dir;
  REQUIRE(run(dir, "synth --letter a --out " + (dir / "a.jsonl")).code == 0);
  REQUIRE(run(dir, "train --letter a --in " + (dir / "a.jsonl") + " --templates " + (dir / "t.json")).code == 0);
  const auto r = run(dir, "classify --in " + (dir / "a.jsonl") + " --templates " + (dir / "t.json"));
  CHECK(r.code == 3);
  CHECK(r.err.find("missing") != std::string::npos);
}

TEST_CASE("config file merges with flags, flags winning") {
  Workdir dir;
  REQUIRE(run(dir, "synth --word ab --out " + (dir / "ab.jsonl")).code == 0);
  std::ofstream(dir / "strict.toml") << "[session]\nthreshold = 100\n";
  const std::string base = "pipeline --in " + (dir / "ab.jsonl") + " --config " + (dir / "strict.toml");
  CHECK(count_lines(run(dir, base).out) == 0);
  CHECK(count_lines(run(dir, base + " --threshold 1").out) == 2);

  std::ofstream(dir / "typo.toml") << "[session]\nthreshhold = 2\n";
  const auto typo = run(dir, "pipeline --in " + (dir / "ab.jsonl") + " --config " + (dir / "typo.toml"));
  CHECK(typo.code == 2);
  CHECK(typo.err.find("config line 2") != std::string::npos);
}

TEST_CASE("eval prints a report and a savings table") {
  Workdir dir;
  const auto r = run(dir, "eval --letters abj --trials 3 --format csv --threads 1");
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("actual\\predicted,a,b,j\n", 0) == 0);
  CHECK(r.out.find("mean accuracy,") != std::string::npos);
  const auto md = run(dir, "eval --letters ab --trials 2");
  CHECK(md.out.find("Mean accuracy:") != std::string::npos);
  const auto s = run(dir, "eval --report-savings --words cake --repetitions 1");
  REQUIRE(s.code == 0);
  CHECK(s.out.find("savings,") != std::string::npos);
  CHECK(run(dir, "eval --letters a1").code == 3);
}
