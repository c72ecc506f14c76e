#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "freqprobe/spectral.hpp"

using namespace freqprobe;

namespace {

// Two-sided p-value by listing every sign assignment of the non-zero
// differences, ranks averaged over ties.
double enumerate_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const std::size_t n = d.size();
  if (n == 0) return 1.0;
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::fabs(d[j]) < std::fabs(d[i])) ++below;
      if (std::fabs(d[j]) == std::fabs(d[i])) ++equal;
    }
    rank[i] = below + (equal + 1) / 2;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) observed += rank[i];
  double lower = 0, upper = 0;
  const std::size_t total = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) w += rank[i];
    if (w <= observed + 1e-9) ++lower;
    if (w >= observed - 1e-9) ++upper;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / static_cast<double>(total));
}

}  // namespace

TEST_SUITE("wilcoxon") {

TEST_CASE("documented examples") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(wilcoxon_paired_two_sided(a, a) == 1.0);
  const std::vector<double> b{0, 0, 0, 0, 0};
  CHECK(wilcoxon_paired_two_sided(a, b) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(wilcoxon_paired_two_sided(b, a) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("preconditions") {
  const std::vector<double> four{1, 2, 3, 4};
  CHECK_THROWS_AS(wilcoxon_paired_two_sided(four, four), std::invalid_argument);
  const std::vector<double> five{1, 2, 3, 4, 5};
  const std::vector<double> six{1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS(wilcoxon_paired_two_sided(five, six), std::invalid_argument);
}

TEST_CASE("exact distribution agrees with enumeration for n up to 10") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(5, 10);
  std::uniform_int_distribution<int> coarse(-4, 4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> a(n), b(n);
    const bool ties = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = ties ? coarse(rng) : g(rng);
      b[i] = ties ? coarse(rng) : g(rng);
    }
    CAPTURE(trial);
    CHECK(wilcoxon_paired_two_sided(a, b) == doctest::Approx(enumerate_p(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("normal approximation above the exact limit") {
  // With n = 40 strictly increasing positive differences the statistic sits
  // at its maximum; the approximation must be tiny and well below alpha.
  std::vector<double> a(40), b(40, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = static_cast<double>(i + 1);
  const double p = wilcoxon_paired_two_sided(a, b);
  const double n = 40, mean = n * (n + 1) / 4, sd = std::sqrt(n * (n + 1) * (2 * n + 1) / 24);
  CHECK(p == doctest::Approx(std::erfc((n * (n + 1) / 2 - mean) / sd / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(p < 1e-6);

  // Balanced signs give a large p.
  for (std::size_t i = 0; i < a.size(); i += 2) a[i] = -a[i];
  CHECK(wilcoxon_paired_two_sided(a, b) > 0.5);
}

}  // TEST_SUITE
