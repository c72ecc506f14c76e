#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "freqprobe/spectral.hpp"

namespace freqprobe {

namespace {

struct RankedDifferences {
  std::vector<double> ranks;  // average ranks of |d|
  std::vector<bool> positive;
  double tie_term = 0.0;      // sum of t^3 - t over tie groups
};

RankedDifferences rank_differences(std::span<const double> a,
                                   std::span<const double> b) {
  std::vector<double> d;
  d.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff != 0.0) d.push_back(diff);
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return std::abs(d[i]) < std::abs(d[j]);
  });

  RankedDifferences out;
  out.ranks.resize(d.size());
  out.positive.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out.positive[i] = d[i] > 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() &&
           std::abs(d[order[j + 1]]) == std::abs(d[order[i]]))
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out.ranks[order[k]] = avg;
    const double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  return out;
}

// Null distribution of the doubled positive-rank sum (integer valued even with
// half-integer average ranks) by dynamic programming over sign assignments.
double exact_p_value(const RankedDifferences& r) {
  std::vector<long> doubled(r.ranks.size());
  long total = 0;
  long observed = 0;
  for (std::size_t i = 0; i < r.ranks.size(); ++i) {
    doubled[i] = std::lround(2.0 * r.ranks[i]);
    total += doubled[i];
    if (r.positive[i]) observed += doubled[i];
  }
  std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
  count[0] = 1.0;
  long reach = 0;
  for (long w : doubled) {
    for (long s = reach; s >= 0; --s)
      if (count[s] != 0.0) count[s + w] += count[s];
    reach += w;
  }
  const double all = std::ldexp(1.0, static_cast<int>(doubled.size()));
  double lower = 0.0, upper = 0.0;
  for (long s = 0; s <= total; ++s) {
    if (s <= observed) lower += count[s];
    if (s >= observed) upper += count[s];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / all);
}

double normal_p_value(const RankedDifferences& r) {
  const double n = static_cast<double>(r.ranks.size());
  double w_plus = 0.0;
  for (std::size_t i = 0; i < r.ranks.size(); ++i)
    if (r.positive[i]) w_plus += r.ranks[i];
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - r.tie_term / 48.0;
  if (!(var > 0.0)) return 1.0;
  const double z = (w_plus - mean) / std::sqrt(var);
  return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
}

}  // namespace

double wilcoxon_paired_two_sided(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("wilcoxon: samples must have equal length");
  if (a.size() < 5) throw std::invalid_argument("wilcoxon: need at least 5 pairs");
  const RankedDifferences r = rank_differences(a, b);
  if (r.ranks.empty()) return 1.0;
  if (r.ranks.size() <= static_cast<std::size_t>(kWilcoxonExactLimit))
    return exact_p_value(r);
  return normal_p_value(r);
}

}  // namespace freqprobe
