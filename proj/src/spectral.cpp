#include "freqprobe/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace freqprobe {

std::vector<double> power_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<double> cos_table(n), sin_table(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) / n;
    cos_table[i] = std::cos(angle);
    sin_table[i] = std::sin(angle);
  }
  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t t = 0; t < n; ++t) {
      re += x[t] * cos_table[idx];
      im -= x[t] * sin_table[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    power[k] = re * re + im * im;
  }
  return power;
}

double dominant_frequency(std::span<const double> x, double fs) {
  if (x.empty()) return 0.0;
  const auto power = power_spectrum(x);
  double best = 0.0;
  for (double p : power) best = std::max(best, p);
  // Lowest bin within rounding of the maximum.
  const double floor = best * (1.0 - 1e-12);
  std::size_t k = 0;
  while (k + 1 < power.size() && power[k] < floor) ++k;
  return static_cast<double>(k) * fs / static_cast<double>(x.size());
}

SpectralScore spectral_rmse(std::span<const FrequencyPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("spectral_rmse: empty pair list");
  SpectralScore score;
  score.per_window.reserve(pairs.size());
  double sum = 0.0;
  for (const auto& p : pairs) {
    const double d = p.f_true - p.f_hat;
    score.per_window.push_back({p.f_true, p.f_hat, d * d});
    sum += d * d;
  }
  score.mse = sum / static_cast<double>(pairs.size());
  score.rmse = std::sqrt(score.mse);
  return score;
}

}  // namespace freqprobe
