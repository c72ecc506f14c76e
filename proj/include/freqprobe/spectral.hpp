#pragma once

#include <span>
#include <utility>
#include <vector>

namespace freqprobe {

/// |X_k|^2 for k = 0 .. floor(N/2) by direct DFT.
std::vector<double> power_spectrum(std::span<const double> x);

/// Bin-of-maximum-magnitude estimate in Hz (k * fs / N). Ties, including the
/// all-zero signal, resolve to the lowest bin.
double dominant_frequency(std::span<const double> x, double fs);

struct FrequencyPair {
  double f_true = 0.0;
  double f_hat = 0.0;
};

struct SpectralScore {
  struct Entry {
    double f_true;
    double f_hat;
    double squared_error;
  };
  std::vector<Entry> per_window;
  double mse = 0.0;
  double rmse = 0.0;
};

/// Throws std::invalid_argument on an empty list.
SpectralScore spectral_rmse(std::span<const FrequencyPair> pairs);

/// Two-sided paired Wilcoxon signed-rank p-value. Zero differences are
/// dropped, tied magnitudes get average ranks. Exact null distribution for up
/// to 25 non-zero differences, tie-corrected normal approximation above.
/// Requires at least 5 pairs; returns 1 when every difference is zero.
double wilcoxon_paired_two_sided(std::span<const double> a,
                                 std::span<const double> b);

inline constexpr int kWilcoxonExactLimit = 25;

}  // namespace freqprobe
