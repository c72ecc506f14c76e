#pragma once

// The six pipeline stages behind the command-line tool. Every stage reads
// and writes under ExperimentConfig::output_dir:
//
//   config.json                    resolved configuration of the last run
//   data/probe_<task>.fqds         probe datasets, one per task
//   data/erasure.fqds              continuous-phase erasure dataset
//   model/weights.fqwt             surrogate weights
//   activations/<task>/<tap>.fqpb  tap activations per probe dataset
//   erasers/<subset>/<tap>.fqer    fitted erasers per tap subset
//   reports/*.csv, *.json          tables and the summary

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "freqprobe/config.hpp"

namespace freqprobe {

using Logger = std::function<void(const std::string&)>;

struct PipelinePaths {
  std::filesystem::path root;

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path probe_dataset(const std::string& task) const {
    return root / "data" / ("probe_" + task + ".fqds");
  }
  std::filesystem::path erasure_dataset() const { return root / "data" / "erasure.fqds"; }
  std::filesystem::path weights() const { return root / "model" / "weights.fqwt"; }
  std::filesystem::path train_log() const { return root / "model" / "train_log.csv"; }
  std::filesystem::path activations_dir() const { return root / "activations"; }
  std::filesystem::path erasers_dir() const { return root / "erasers"; }
  std::filesystem::path reports() const { return root / "reports"; }
};

/// Activation file of one (task, tap) pair under `dir`.
std::filesystem::path activation_path(const std::filesystem::path& dir, const std::string& task,
                                      const std::string& tap);

/// Writes the probe datasets for cfg.tasks and the erasure dataset. Returns the
/// window count per dataset name.
std::map<std::string, std::size_t> cmd_gen(const ExperimentConfig& cfg, const Logger& log = {});

/// Trains the surrogate on a fresh corpus and saves its weights.
TrainReport cmd_train(const ExperimentConfig& cfg, const Logger& log = {});

/// Extracts activations at cfg.taps for every probe dataset.
void cmd_tap(const ExperimentConfig& cfg, const Logger& log = {});

struct ProbeRun {
  std::vector<ProbeReport> truth;
  std::vector<ProbeReport> control;
};

/// True and control probes for every (tap, task) pair; activations are read
/// from `activations_dir` (default: the pipeline's own). Throws
/// MissingInputError naming the tap when a file is absent.
ProbeRun cmd_probe(const ExperimentConfig& cfg,
                   const std::optional<std::filesystem::path>& activations_dir = {},
                   const Logger& log = {});

/// Runs the erasure experiment, writes the table, the erasers and the
/// input/output frequency curves.
std::vector<ErasureRow> cmd_erase(const ExperimentConfig& cfg, const Logger& log = {});

/// Collects whatever stage outputs exist into reports/summary.json.
nlohmann::json cmd_report(const ExperimentConfig& cfg, const Logger& log = {});

/// Schema that summary.json conforms to (JSON Schema draft 2020-12).
const std::string& summary_schema();

/// In-band multiples of fs / patch.
std::vector<int> aliasing_harmonics(int fs, int patch, int f_min, int f_max);

/// Probe reports as JSON rows, the form embedded in the summary.
nlohmann::json probe_rows_json(const ProbeRun& run, const std::vector<int>& harmonics,
                               double dip_threshold);

}  // namespace freqprobe
