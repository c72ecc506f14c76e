// freqprobe gen|train|tap|probe|erase|report --config <path> [--seed N] [--out DIR]

#include <chrono>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "freqprobe/errors.hpp"
#include "freqprobe/pipeline.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kMissing = 3, kNumerical = 4 };

void log_line(const std::string& msg) {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  const double s = std::chrono::duration<double>(clock::now() - start).count();
  std::cerr << "[" << std::fixed << std::setprecision(1) << s << "s] " << msg << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency probing toolkit for patch-based forecasters"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string activations;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config (defaults when omitted)");
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--out", out_dir, "Override the output directory");
  };
  auto* gen = app.add_subcommand("gen", "Write probe and erasure datasets");
  auto* train = app.add_subcommand("train", "Train the surrogate forecaster");
  auto* tap = app.add_subcommand("tap", "Extract tap activations for every probe dataset");
  auto* probe = app.add_subcommand("probe", "Run true and control MDL probes");
  auto* erase = app.add_subcommand("erase", "Fit erasers and score closed-loop generation");
  auto* report = app.add_subcommand("report", "Collect outputs into reports/summary.json");
  auto* defaults = app.add_subcommand("defaults", "Print the default configuration");
  for (auto* sub : {gen, train, tap, probe, erase, report, defaults}) common(sub);
  probe->add_option("--activations", activations,
                    "Directory of <task>/<tap>.fqpb files (default: OUT/activations)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    freqprobe::ExperimentConfig cfg =
        config_path.empty() ? freqprobe::ExperimentConfig{} : freqprobe::load_config(config_path);
    if (seed) cfg.apply_seed(*seed);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.erasure.options.fs = cfg.signal.fs;
    cfg.validate();

    if (*defaults) {
      std::cout << freqprobe::config_to_json(cfg).dump(2) << std::endl;
    } else if (*gen) {
      freqprobe::cmd_gen(cfg, log_line);
    } else if (*train) {
      freqprobe::cmd_train(cfg, log_line);
    } else if (*tap) {
      freqprobe::cmd_tap(cfg, log_line);
    } else if (*probe) {
      std::optional<std::filesystem::path> dir;
      if (!activations.empty()) dir = activations;
      freqprobe::cmd_probe(cfg, dir, log_line);
    } else if (*erase) {
      freqprobe::cmd_erase(cfg, log_line);
    } else if (*report) {
      freqprobe::cmd_report(cfg, log_line);
    }
    return kOk;
  } catch (const freqprobe::ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kConfig;
  } catch (const freqprobe::MissingInputError& e) {
    std::cerr << "missing input: " << e.what() << std::endl;
    return kMissing;
  } catch (const freqprobe::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kFailure;
  }
}
