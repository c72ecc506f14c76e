#pragma once

// Erasure experiments, input/output frequency curves, CSV emitters and the
// bounded worker pool used by the pipeline.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/eraser.hpp"
#include "freqprobe/forecaster.hpp"
#include "freqprobe/probe.hpp"
#include "freqprobe/signal.hpp"
#include "freqprobe/spectral.hpp"

namespace freqprobe {

using TapSubset = std::vector<std::size_t>;

/// {0},{1},{2},{3},{4},{0,1},{0,1,2},{0,1,2,3},{0,1,2,3,4},{1,2,3,4},{2,3,4},{3,4}
std::vector<TapSubset> standard_tap_subsets();

/// "01234"-style label; "baseline" for the empty subset.
std::string subset_label(const TapSubset& subset);
/// Inverse of subset_label; throws DomainError on unknown or unordered digits.
TapSubset parse_subset(const std::string& label);

struct ErasureRow {
  std::string subset;
  double rmse = 0.0;
  std::optional<double> p_value;  ///< empty on the baseline row
  bool significant = false;       ///< p < alpha
  std::vector<double> squared_errors;
  std::vector<FittedEraser> erasers;
};

struct ErasureOptions {
  int generate_length = 512;
  int fs = 512;
  double alpha = 0.05;
  LeaceOptions leace;
};

/// Baseline row first, then one row per subset. Erasers are fit sequentially on
/// the train windows with the binary task concept; generation runs on the test
/// windows; each row is compared with the baseline per-window squared errors.
std::vector<ErasureRow> erasure_experiment(const TappedModel& model, const DatasetSplit& data,
                                           const BandTask& task,
                                           const std::vector<TapSubset>& subsets,
                                           const ErasureOptions& opt = {});

/// Dominant frequencies of generated sequences, one per row.
std::vector<double> dominant_frequencies(const Eigen::MatrixXd& generated, double fs);

struct IoPoint {
  int f = 0;
  double mean = 0.0;
  double std = 0.0;
};

/// Maps contexts (one per row) to generated sequences (one per row).
using Generator = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

/// For each f, generates from n_windows random-phase contexts and aggregates
/// the dominant generated frequency.
std::vector<IoPoint> input_output_curve(const Generator& gen, const std::vector<int>& frequencies,
                                        int n_windows, int fs, int context, std::uint64_t seed);

/// Rows of a LabeledWindows set stacked into an n x T matrix.
Eigen::MatrixXd stack_windows(const LabeledWindows& set);

// CSV emitters. Each writes a header line and overwrites `path`.
void write_sv_csv(const std::filesystem::path& path, const std::vector<ProbeReport>& truth,
                  const std::vector<ProbeReport>& control);
void write_accuracy_csv(const std::filesystem::path& path, const std::vector<ProbeReport>& reports,
                        const std::vector<BandTask>& tasks, int f_min, int f_max);
void write_erasure_csv(const std::filesystem::path& path, const std::vector<ErasureRow>& rows);
void write_io_csv(const std::filesystem::path& path, const std::vector<IoPoint>& points);

/// Worker count from FREQPROBE_WORKERS, else hardware concurrency, at least 1.
std::size_t worker_count();

/// Runs job(i) for i in [0, n) on at most `workers` threads. The first
/// exception thrown by any job is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job);

}  // namespace freqprobe
