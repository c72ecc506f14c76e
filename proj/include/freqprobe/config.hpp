#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "freqprobe/experiment.hpp"
#include "freqprobe/forecaster.hpp"
#include "freqprobe/probe.hpp"
#include "freqprobe/signal.hpp"
#include "freqprobe/training.hpp"

namespace freqprobe {

struct TrainingSection {
  TrainConfig train;
  std::size_t corpus_size = 32768;
};

struct ErasureSection {
  std::string task = "Mid";
  int n_phases = 100;
  int frequency_step = 1;
  double train_fraction = 0.7;
  std::vector<TapSubset> tap_subsets = standard_tap_subsets();
  ErasureOptions options;
};

struct IoCurveSection {
  int f_step = 8;
  int n_windows = 8;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "freqprobe-out";
  SignalConfig signal;
  ModelConfig model;
  TrainingSection training;
  ProbeConfig probe;
  std::vector<std::string> tasks = {"LL", "L", "LH", "Mid", "HL", "H", "HH"};
  std::vector<std::string> taps = {"dec0", "dec1", "dec2", "dec3", "out"};
  ErasureSection erasure;
  IoCurveSection io_curve;

  /// Propagates `seed` into every sub-config that carries its own.
  void apply_seed(std::uint64_t s);
  /// Cross-field checks; throws ConfigError naming the field.
  void validate() const;
};

/// Unknown keys and type mismatches raise ConfigError with a dotted path.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Throws MissingInputError when the file is absent, ConfigError when invalid.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace freqprobe
