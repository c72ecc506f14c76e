#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "freqprobe/config.hpp"
#include "freqprobe/errors.hpp"
#include "freqprobe/pipeline.hpp"

using namespace freqprobe;
using nlohmann::json;

namespace {

std::string error_path(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto cfg = config_from_json(json::object());
  CHECK(cfg.signal.fs == 512);
  CHECK(cfg.signal.window == 512);
  CHECK(cfg.model.context == 512);
  CHECK(cfg.model.patch == 16);
  CHECK(cfg.model.horizon == 64);
  CHECK(cfg.tasks.size() == 7);
  CHECK(cfg.taps.size() == 5);
  CHECK(cfg.erasure.task == "Mid");
  CHECK(cfg.erasure.tap_subsets.size() == 12);
  CHECK(cfg.probe.replay_streams == 3);
  CHECK(cfg.probe.batch_size == 128);
}

TEST_CASE("seed propagation") {
  const auto cfg = config_from_json({{"seed", 10}});
  CHECK(cfg.signal.seed == 10);
  CHECK(cfg.model.seed == 10);
  CHECK(cfg.training.train.seed == 11);
  CHECK(cfg.probe.seed == 12);
  // An explicit sub-seed wins over the propagated one.
  CHECK(config_from_json({{"seed", 10}, {"signal", {{"seed", 3}}}}).signal.seed == 3);
}

TEST_CASE("round trip through JSON") {
  json j = {{"seed", 4},
            {"signal", {{"cap", 30}, {"T", 256}}},
            {"model", {{"context", 256}, {"d_model", 32}, {"pooling", "mean"}}},
            {"erasure", {{"tap_subsets", {"0", "1234"}}, {"n_phases", 7}}},
            {"tasks", {"LL"}}};
  const auto cfg = config_from_json(j);
  CHECK(cfg.model.pooling == TapPooling::Mean);
  CHECK(cfg.erasure.tap_subsets == std::vector<TapSubset>{{0}, {1, 2, 3, 4}});
  const json out = config_to_json(cfg);
  CHECK(config_to_json(config_from_json(out)) == out);
  CHECK(out["signal"]["T"] == 256);
}

TEST_CASE("errors name the offending field") {
  CHECK(error_path({{"signal", {{"bogus", 1}}}}) == "signal.bogus");
  CHECK(error_path({{"model", {{"d_model", "wide"}}}}) == "model.d_model");
  CHECK(error_path({{"model", {{"pooling", "max"}}}}) == "model.pooling");
  CHECK(error_path({{"tasks", {"Mid", "XX"}}}) == "tasks[1]");
  CHECK(error_path({{"taps", {"enc0"}}}) == "taps[0]");
  CHECK(error_path({{"signal", {{"T", 256}}}}) == "model.context");
  CHECK(error_path({{"signal", {{"f_max", 300}}}}) == "signal");
  CHECK(error_path({{"probe", {{"batch_size", 100}}}}) == "probe");
  CHECK(error_path({{"erasure", {{"tap_subsets", {"0", "21"}}}}}) == "erasure.tap_subsets[1]");
  CHECK(error_path({{"erasure", {{"generate_length", 100}}}}) == "erasure.generate_length");
  CHECK(error_path({{"erasure", {{"train_fraction", 1.0}}}}) == "erasure.train_fraction");
  CHECK(error_path({{"unknown_section", {}}}) == "unknown_section");
  CHECK(error_path(json::array()) == "<root>");
}

TEST_CASE("loading from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "freqprobe_unit";
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(load_config(dir / "absent.json"), MissingInputError);
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
  std::ofstream(dir / "ok.json") << R"({"seed": 2})";
  CHECK(load_config(dir / "ok.json").seed == 2);
}

TEST_CASE("aliasing harmonics and the summary schema") {
  CHECK(aliasing_harmonics(512, 16, 2, 250) == std::vector<int>{32, 64, 96, 128, 160, 192, 224});
  CHECK(aliasing_harmonics(512, 16, 40, 100) == std::vector<int>{64, 96});
  const json schema = json::parse(summary_schema());
  CHECK(schema["$schema"] == "https://json-schema.org/draft/2020-12/schema");
  CHECK(schema["required"].size() > 0);
}

TEST_CASE("probe rows flag dips at harmonics") {
  ProbeRun run;
  ProbeReport r;
  r.task = "LL";
  r.tap = "out";
  r.per_frequency_accuracy = {{31, 0.9}, {32, 0.3}, {33, 0.5}, {64, 1.0}};
  run.truth.push_back(r);
  const json rows = probe_rows_json(run, {32, 64}, 0.6);
  CHECK(rows["dip_threshold"] == 0.6);
  REQUIRE(rows["rows"].size() == 1);
  CHECK(rows["rows"][0]["dips"] == json({32, 33}));
  CHECK(rows["rows"][0]["harmonic_dips"] == json({32}));
}

}  // TEST_SUITE
