#include "support.hpp"

#include <gapmark/cli.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gapmark;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = GAPMARK_FIXTURES;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("gapmark_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"ingest"}).code == 1);  // no input source
  const auto fixture = (kFixtures / "two_activities.txt").string();
  CHECK(run({"ingest", "--input", fixture, "--synth-preset", "small"}).code == 1);
  CHECK(run({"evaluate", "--input", fixture, "--train-fraction", "1.0"}).code == 1);
  CHECK(run({"evaluate", "--input", fixture, "--delta-t", "-3"}).code == 1);
  CHECK(run({"evaluate", "--input", fixture, "--paradigms", "p9"}).code == 1);
  CHECK(run({"synth"}).code == 1);
  CHECK(run({"ingest", "--help"}).code == 0);
}

TEST_CASE("data errors exit 2") {
  const auto dir = scratch("data");
  const auto empty = dir / "empty.txt";
  std::ofstream(empty).close();
  CHECK(run({"ingest", "--input", empty.string(), "--out", dir.string()}).code == 2);
  CHECK(run({"ingest", "--input", (dir / "missing.txt").string(), "--out", dir.string()}).code == 2);

  const auto bad = dir / "bad.txt";
  std::ofstream(bad) << "2010-11-04 08:00:00 M001 ON\nnonsense\n2010-11-04 08:00:09 M001 OFF\n";
  CHECK(run({"ingest", "--input", bad.string(), "--out", dir.string()}).code == 2);
  const auto skipped = run({"ingest", "--input", bad.string(), "--out", dir.string(), "--skip-malformed"});
  CHECK(skipped.code == 0);
  CHECK(contains(skipped.out, "skipped lines: 1"));

  const auto cfg = dir / "synth.cfg";
  std::ofstream(cfg) << "preset=small\ngap_fraction=1.5\n";
  CHECK(run({"synth", "--synth-config", cfg.string(), "--out", dir.string()}).code == 2);
}

TEST_CASE("ingest reports fixture statistics") {
  const auto dir = scratch("ingest");
  const auto r = run({"ingest", "--input", (kFixtures / "two_activities.txt").string(), "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "events: 20"));
  CHECK(contains(r.out, "activities: 2"));
  CHECK(contains(r.out, "gap runs: 1"));
  CHECK(contains(r.out, "samples: 28"));
  const auto csv = slurp(dir / "samples.csv");
  CHECK(csv.rfind("timestamp,code_hex,label\n", 0) == 0);

  const auto synth = run({"ingest", "--synth-preset", "aruba-like", "--samples", "5000", "--out", dir.string()});
  REQUIRE(synth.code == 0);
  CHECK(contains(synth.out, "samples: 5000"));
  CHECK(contains(synth.out, "sensors: 34"));
}

TEST_CASE("train writes one model per paradigm with the expected state counts") {
  const auto dir = scratch("train");
  const auto r = run({"train", "--input", (kFixtures / "three_segments.txt").string(), "--train-fraction", "0.95",
                      "--paradigms", "p1,p2,p3", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(contains(r.out, "P1: N_total 2"));
  CHECK(contains(r.out, "P2: N_total 3"));
  CHECK(contains(r.out, "P3: N_total 4"));
  CHECK(fs::exists(dir / "model-p1.hmm"));
  CHECK(fs::exists(dir / "model-p3.hmm"));

  const auto scored = run({"evaluate", "--input", (kFixtures / "three_segments.txt").string(), "--train-fraction",
                           "0.95", "--model", (dir / "model-p3.hmm").string(), "--out", dir.string()});
  CHECK(scored.code == 0);
  CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("evaluate is reproducible") {
  const auto a = scratch("eval_a");
  const auto b = scratch("eval_b");
  const std::vector<std::string> common = {"evaluate", "--synth-preset", "small", "--samples", "3000", "--seed", "3"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string()});
  const auto ra = run(args_a);
  REQUIRE(ra.code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  for (const auto* name : {"P1", "P2", "P3", "Hybrid"}) CHECK(contains(ra.out, name));

  const auto single = scratch("eval_single");
  auto args_single = common;
  args_single.insert(args_single.end(), {"--paradigms", "p2", "--out", single.string()});
  REQUIRE(run(args_single).code == 0);
  const auto csv = slurp(single / "report.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "activity,metric,P2");
}

TEST_CASE("config file and GAPMARK_OUT") {
  const auto dir = scratch("config");
  const auto cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# run\nsynth_preset=small\nsamples=2000\ndelta_t=auto\nparadigms=p1,p3\n";
  ::setenv("GAPMARK_OUT", dir.string().c_str(), 1);
  const auto r = run({"evaluate", "--config", cfg.string()});
  ::unsetenv("GAPMARK_OUT");
  REQUIRE(r.code == 0);
  const auto json = slurp(dir / "report.json");
  CHECK(contains(json, "\"delta-t\": \"auto\""));
  CHECK(contains(slurp(dir / "report.csv"), "activity,metric,P1,P3"));
}

TEST_CASE("synth writes identical files for a fixed seed") {
  const auto a = scratch("synth_a");
  const auto b = scratch("synth_b");
  REQUIRE(run({"synth", "--synth-preset", "aruba-like", "--samples", "3000", "--seed", "4", "--out", a.string()}).code == 0);
  REQUIRE(run({"synth", "--synth-preset", "aruba-like", "--samples", "3000", "--seed", "4", "--out", b.string()}).code == 0);
  CHECK(slurp(a / "events.txt") == slurp(b / "events.txt"));
  CHECK(slurp(a / "truth.csv") == slurp(b / "truth.csv"));
  CHECK_FALSE(slurp(a / "events.txt").empty());

  // The written stream feeds straight back into ingest.
  const auto r = run({"ingest", "--input", (a / "events.txt").string(), "--out", a.string()});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "samples: 3000"));
}
