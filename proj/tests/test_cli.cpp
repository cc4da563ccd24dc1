#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "navirl/cli/commands.hpp"
#include "navirl/io.hpp"

using namespace navirl;
using namespace navirl::cli;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("navirl_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

RunConfig small_config(const std::string& data_dir, const std::string& out) {
  RunConfig c;
  c.merge(nlohmann::json::parse(R"({
    "threads": 1,
    "map": {"width": 8, "height": 8},
    "sensor": {"beams": 16},
    "dataset": {"train_maps": 3, "val_maps": 2, "test_maps": 3, "trajectories_per_map": 2},
    "train": {"epochs": 2},
    "bench": {"sizes": [8, 12], "reps": 1},
    "dyna": {"total_steps": 400, "switch_step": 150}
  })"));
  c.set("dataset.dir", data_dir);
  c.set("out", out);
  return c;
}

int run(const std::string& cmd, const RunConfig& cfg, std::string* err_text = nullptr) {
  std::ostringstream log, err;
  const int code = run_command(cmd, cfg, log, err);
  if (err_text) *err_text = err.str();
  return code;
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_file(path)); }

}  // namespace

TEST_CASE("config is strict about keys and types") {
  RunConfig c;
  CHECK_THROWS_AS(c.set("model.nope", "1"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("train.epochs", "1.5"), std::invalid_argument);
  CHECK_THROWS_AS(c.set("train.epochs", "many"), std::invalid_argument);
  c.set("train.lr", "0.5");
  CHECK(c.train().adam.lr == 0.5);
  c.set("model.l", "3");
  CHECK(c.initial_theta().cost.l == 3.0);
  c.set("dataset.dir", "some/where");
  CHECK(c.dataset_dir() == "some/where");
  CHECK_THROWS(RunConfig::load("", {"no_equals_sign"}));

  c = RunConfig();
  c.set("train.select", "\"best\"");
  CHECK_THROWS(c.validate());
  c = RunConfig();
  c.set("map.obstacle_density", "1.0");
  CHECK_THROWS(c.validate());
}

TEST_CASE("gen writes the requested splits and regenerates byte-identically") {
  const std::string root = scratch("gen");
  auto cfg = small_config(root + "/data", root + "/data");
  REQUIRE(run("gen", cfg) == kOk);
  const auto manifest = read_json(root + "/data/manifest.json");
  CHECK(manifest["splits"]["train"]["trajectories"] == 6);
  CHECK(manifest["splits"]["val"]["trajectories"] == 4);
  CHECK(manifest["splits"]["test"]["trajectories"] == 3);
  CHECK(fs::exists(root + "/data/maps/test_00002.grid"));

  cfg.set("out", root + "/again");
  REQUIRE(run("gen", cfg) == kOk);
  for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "maps/train_00001.grid"}) {
    CHECK(read_file(root + "/data/" + f) == read_file(root + "/again/" + f));
  }

  cfg.set("map.obstacle_density", "1.0");
  cfg.set("out", root + "/dense");
  std::string err;
  CHECK(run("gen", cfg, &err) == kInternal);
  CHECK(err.find("obstacle_density") != std::string::npos);
}

TEST_CASE("train, eval, resume and failure exit codes") {
  const std::string root = scratch("train");
  auto cfg = small_config(root + "/data", root + "/data");
  REQUIRE(run("gen", cfg) == kOk);

  auto missing = small_config(root + "/nowhere", root + "/t0");
  CHECK(run("train", missing) == kMissingInput);

  cfg.set("out", root + "/t1");
  REQUIRE(run("train", cfg) == kOk);
  const auto ckpt = read_json(root + "/t1/checkpoint.json");
  const auto m1 = read_json(root + "/t1/manifest.json");
  CHECK(m1["optimizer_step"] == 12);
  CHECK(read_file(root + "/t1/metrics.csv").find("val_success") != std::string::npos);

  cfg.set("out", root + "/t2");
  cfg.set("train.resume", root + "/t1/last.json");
  REQUIRE(run("train", cfg) == kOk);
  CHECK(read_json(root + "/t2/manifest.json")["optimizer_step"] == 24);

  // A second dataset with a different seed has a different fingerprint.
  auto other = small_config(root + "/other", root + "/other");
  other.set("seed", "2");
  REQUIRE(run("gen", other) == kOk);
  other.set("out", root + "/t3");
  other.set("train.resume", root + "/t1/last.json");
  CHECK(run("train", other) == kIntegrity);

  cfg = small_config(root + "/data", root + "/e1");
  cfg.set("eval.checkpoint", root + "/t1/checkpoint.json");
  cfg.set("eval.trace", "true");
  REQUIRE(run("eval", cfg) == kOk);
  const std::string eval_csv = read_file(root + "/e1/eval.csv");
  CHECK(eval_csv.rfind("trials,success_rate", 0) == 0);
  CHECK(fs::exists(root + "/e1/rollouts.jsonl"));
  cfg.set("out", root + "/e2");
  REQUIRE(run("eval", cfg) == kOk);
  CHECK(read_file(root + "/e2/eval.csv") == eval_csv);

  cfg.set("eval.checkpoint", root + "/absent.json");
  cfg.set("out", root + "/e3");
  CHECK(run("eval", cfg) == kMissingInput);

  cfg = small_config(root + "/data", root + "/r1");
  REQUIRE(run("render", cfg) == kOk);
  CHECK(fs::exists(root + "/r1/belief_000.pgm"));
}

TEST_CASE("bench and dyna outputs") {
  const std::string root = scratch("bench");
  auto cfg = small_config(root + "/data", root + "/b");
  REQUIRE(run("bench", cfg) == kOk);
  const std::string counts = read_file(root + "/b/bench_counts.csv");
  int lines = 0;
  for (char c : counts) lines += c == '\n';
  CHECK(lines == 3);

  cfg.set("out", root + "/d");
  REQUIRE(run("dyna", cfg) == kOk);
  const std::string curve = read_file(root + "/d/dyna.csv");
  CHECK(curve.find('\n') != std::string::npos);
  CHECK(fs::exists(root + "/d/dyna_episodes.csv"));
  CHECK(read_json(root + "/d/manifest.json")["phase1_length"] == 8);
}
