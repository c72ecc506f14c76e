#pragma once

// Synthetic sinusoid datasets: phase-shift enumeration, windowing, instance
// normalisation, hierarchical band labels and spectral predictability.

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace freqprobe {

struct SignalConfig {
  int fs = 512;        ///< sampling rate, Hz
  int window = 512;    ///< T, samples per window
  int f_min = 2;       ///< operational band, Hz
  int f_max = 250;
  double epsilon = 1e-5;
  int cap = 100;       ///< N, per-frequency window cap
  std::uint64_t seed = 0;

  /// Throws DomainError when an invariant is violated (Nyquist guard etc).
  void validate() const;
};

struct TimeSeriesWindow {
  std::vector<double> samples;
  int frequency = 0;
  double phase = 0.0;
  std::int64_t source_offset = 0;
};

struct BandTask {
  std::string name;
  int lo = 0;
  int hi = 0;
  int threshold = 0;
  /// Index into the returned hierarchy of the parent task, -1 for the root.
  int parent = -1;
};

enum class BandLabel : int { Below = 0, Above = 1, Excluded = -1 };

struct SplitRatios {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct LabeledWindows {
  std::vector<TimeSeriesWindow> windows;
  std::vector<int> labels;

  std::size_t size() const { return windows.size(); }
};

struct DatasetSplit {
  LabeledWindows train;
  LabeledWindows validation;
  LabeledWindows test;

  std::size_t size() const {
    return train.size() + validation.size() + test.size();
  }
};

struct NormalizedSeries {
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;  ///< population std before flooring
};

inline constexpr int kUncapped = std::numeric_limits<int>::max();

/// S_f = min(fs / gcd(f, fs) - 1, cap): the number of non-trivial circular
/// shifts of sin(2 pi f n / fs) that yield distinct sequences.
int count_phase_shifts(int f, int fs, int cap = kUncapped);

/// x[n] = sin(2 pi f n / fs + phase). The integer product f*n is reduced
/// modulo fs before scaling so equal phases give bitwise-equal samples.
std::vector<double> make_sinusoid(int f, int fs, std::size_t length,
                                  double phase = 0.0);

NormalizedSeries instance_normalize(std::span<const double> x, double epsilon);

/// Seven-node depth-3 binary partition of [f_min, f_max] ordered by
/// ascending threshold: LL, L, LH, Mid, HL, H, HH.
std::vector<BandTask> build_task_hierarchy(int f_min, int f_max);

const BandTask& find_task(const std::vector<BandTask>& tasks,
                          const std::string& name);

/// Excluded outside [lo, hi]; otherwise Above iff f > threshold.
BandLabel label_window(const BandTask& task, int f);

/// Stride-1 windows over phase-zero sinusoids, S_f per in-band frequency,
/// split per frequency under `seed`. Labels are 0/1 band labels.
DatasetSplit build_probe_dataset(const SignalConfig& cfg, const BandTask& task,
                                 SplitRatios ratios, std::uint64_t seed);

/// One window per sampled phase per frequency, cut from a length-2T
/// sinusoid at a seeded stride-1 offset. Labels are the frequencies in Hz.
/// Validation is left empty.
DatasetSplit build_erasure_dataset(const SignalConfig& cfg, int n_phases,
                                   std::uint64_t seed,
                                   double train_fraction = 0.7,
                                   int frequency_step = 1);

/// Throws DomainError if any byte-identical window appears in two splits.
void check_split_uniqueness(const DatasetSplit& split);

/// Omega = 1 - H / log(bins) over the normalised one-sided power spectrum.
double spectral_predictability(std::span<const double> x);

}  // namespace freqprobe
