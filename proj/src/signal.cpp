#include "freqprobe/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string_view>
#include <unordered_set>

#include "freqprobe/errors.hpp"
#include "freqprobe/spectral.hpp"

namespace freqprobe {

void SignalConfig::validate() const {
  if (fs <= 0) throw DomainError("fs must be positive");
  if (window <= 0) throw DomainError("window length T must be positive");
  if (epsilon <= 0.0) throw DomainError("epsilon must be positive");
  if (cap < 1) throw DomainError("cap must be >= 1");
  if (f_min <= 0 || f_min > f_max)
    throw DomainError("band must satisfy 0 < f_min <= f_max");
  if (2 * f_max >= fs) throw DomainError("f_max must lie below fs/2 (Nyquist)");
}

int count_phase_shifts(int f, int fs, int cap) {
  if (cap < 1) throw DomainError("cap must be >= 1");
  if (f < 1 || 2 * f >= fs)
    throw DomainError("frequency must satisfy 1 <= f < fs/2");
  const int distinct = fs / std::gcd(f, fs) - 1;
  return std::min(distinct, cap);
}

std::vector<double> make_sinusoid(int f, int fs, std::size_t length,
                                  double phase) {
  if (fs <= 0) throw DomainError("fs must be positive");
  if (f < 1 || 2 * f >= fs)
    throw DomainError("frequency must satisfy 1 <= f < fs/2");
  if (length == 0) throw DomainError("length must be >= 1");
  std::vector<double> out(length);
  const auto period = static_cast<std::uint64_t>(fs);
  const double step = 2.0 * std::numbers::pi / static_cast<double>(fs);
  for (std::size_t n = 0; n < length; ++n) {
    const auto reduced = (static_cast<std::uint64_t>(f) * n) % period;
    out[n] = std::sin(step * static_cast<double>(reduced) + phase);
  }
  return out;
}

NormalizedSeries instance_normalize(std::span<const double> x, double epsilon) {
  if (x.empty()) throw DomainError("cannot normalise an empty series");
  NormalizedSeries out;
  const double n = static_cast<double>(x.size());
  out.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / n);
  const double scale = std::max(out.std, epsilon);
  out.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out.values[i] = (x[i] - out.mean) / scale;
  return out;
}

namespace {

int midpoint(int lo, int hi) {
  return static_cast<int>(std::lround(0.5 * (static_cast<double>(lo) + hi)));
}

BandTask make_task(std::string name, int lo, int hi, int parent) {
  BandTask t{std::move(name), lo, hi, midpoint(lo, hi), parent};
  if (!(t.lo < t.threshold && t.threshold < t.hi))
    throw DomainError("band [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "] too narrow to split (task " +
                      t.name + ")");
  return t;
}

}  // namespace

std::vector<BandTask> build_task_hierarchy(int f_min, int f_max) {
  if (f_min >= f_max) throw DomainError("f_min must be below f_max");
  // Build in tree order, then re-order by threshold and remap parents.
  std::vector<BandTask> tree;
  tree.push_back(make_task("Mid", f_min, f_max, -1));
  const int mid = tree[0].threshold;
  tree.push_back(make_task("L", f_min, mid, 0));
  tree.push_back(make_task("H", mid, f_max, 0));
  tree.push_back(make_task("LL", tree[1].lo, tree[1].threshold, 1));
  tree.push_back(make_task("LH", tree[1].threshold, tree[1].hi, 1));
  tree.push_back(make_task("HL", tree[2].lo, tree[2].threshold, 2));
  tree.push_back(make_task("HH", tree[2].threshold, tree[2].hi, 2));

  std::vector<int> order(tree.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return tree[a].threshold < tree[b].threshold;
  });
  std::vector<int> position(tree.size());
  for (std::size_t i = 0; i < order.size(); ++i) position[order[i]] = static_cast<int>(i);

  std::vector<BandTask> out;
  out.reserve(tree.size());
  for (int idx : order) {
    BandTask t = tree[idx];
    if (t.parent >= 0) t.parent = position[t.parent];
    out.push_back(std::move(t));
  }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].threshold <= out[i - 1].threshold)
      throw DomainError("band too narrow: thresholds not strictly increasing");
  return out;
}

const BandTask& find_task(const std::vector<BandTask>& tasks,
                          const std::string& name) {
  for (const auto& t : tasks)
    if (t.name == name) return t;
  throw DomainError("unknown task '" + name + "'");
}

BandLabel label_window(const BandTask& task, int f) {
  if (f < task.lo || f > task.hi) return BandLabel::Excluded;
  return f > task.threshold ? BandLabel::Above : BandLabel::Below;
}

namespace {

struct Allocation {
  std::size_t train;
  std::size_t validation;
};

void validate_ratios(const SplitRatios& r) {
  if (r.train < 0 || r.validation < 0 || r.test < 0)
    throw DomainError("split ratios must be non-negative");
  if (std::abs(r.train + r.validation + r.test - 1.0) > 1e-9)
    throw DomainError("split ratios must sum to 1");
}

Allocation allocate(std::size_t n, const SplitRatios& r) {
  auto train = static_cast<std::size_t>(std::floor(r.train * n));
  auto val = static_cast<std::size_t>(std::floor(r.validation * n));
  // Keep at least one test window whenever the frequency has any to spare.
  if (r.test > 0 && train + val >= n && n > 1) {
    if (val > 0)
      --val;
    else
      --train;
  }
  return {train, val};
}

std::string_view bytes_of(const std::vector<double>& v) {
  return {reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double)};
}

void append(LabeledWindows& dst, TimeSeriesWindow w, int label) {
  dst.windows.push_back(std::move(w));
  dst.labels.push_back(label);
}

}  // namespace

void check_split_uniqueness(const DatasetSplit& split) {
  std::unordered_set<std::string_view> seen_train, seen_val;
  for (const auto& w : split.train.windows) seen_train.insert(bytes_of(w.samples));
  for (const auto& w : split.validation.windows) {
    if (seen_train.contains(bytes_of(w.samples)))
      throw DomainError("uniqueness check failed: window shared by train and validation");
    seen_val.insert(bytes_of(w.samples));
  }
  for (const auto& w : split.test.windows) {
    const auto key = bytes_of(w.samples);
    if (seen_train.contains(key) || seen_val.contains(key))
      throw DomainError("uniqueness check failed: test window duplicated in another split");
  }
}

DatasetSplit build_probe_dataset(const SignalConfig& cfg, const BandTask& task,
                                 SplitRatios ratios, std::uint64_t seed) {
  cfg.validate();
  validate_ratios(ratios);
  std::mt19937_64 rng(seed);
  DatasetSplit out;
  const int lo = std::max(task.lo, cfg.f_min);
  const int hi = std::min(task.hi, cfg.f_max);
  const auto T = static_cast<std::size_t>(cfg.window);
  for (int f = lo; f <= hi; ++f) {
    const BandLabel label = label_window(task, f);
    if (label == BandLabel::Excluded) continue;
    const auto shifts = static_cast<std::size_t>(count_phase_shifts(f, cfg.fs, cfg.cap));
    const auto source = make_sinusoid(f, cfg.fs, T + shifts - 1, 0.0);
    std::vector<std::size_t> offsets(shifts);
    std::iota(offsets.begin(), offsets.end(), 0);
    std::shuffle(offsets.begin(), offsets.end(), rng);
    const Allocation alloc = allocate(shifts, ratios);
    for (std::size_t i = 0; i < shifts; ++i) {
      const std::size_t off = offsets[i];
      TimeSeriesWindow w;
      w.samples.assign(source.begin() + static_cast<std::ptrdiff_t>(off),
                       source.begin() + static_cast<std::ptrdiff_t>(off + T));
      w.frequency = f;
      // Shifting by `off` samples advances the phase by 2 pi f off / fs.
      const auto turns = (static_cast<std::uint64_t>(f) * off) % static_cast<std::uint64_t>(cfg.fs);
      w.phase = 2.0 * std::numbers::pi * static_cast<double>(turns) / cfg.fs;
      w.source_offset = static_cast<std::int64_t>(off);
      LabeledWindows& dst = i < alloc.train                        ? out.train
                            : i < alloc.train + alloc.validation   ? out.validation
                                                                   : out.test;
      append(dst, std::move(w), static_cast<int>(label));
    }
  }
  check_split_uniqueness(out);
  return out;
}

DatasetSplit build_erasure_dataset(const SignalConfig& cfg, int n_phases,
                                   std::uint64_t seed, double train_fraction,
                                   int frequency_step) {
  cfg.validate();
  if (n_phases < 1) throw DomainError("n_phases must be >= 1");
  if (frequency_step < 1) throw DomainError("frequency_step must be >= 1");
  if (train_fraction < 0.0 || train_fraction > 1.0)
    throw DomainError("train_fraction must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
  const auto T = static_cast<std::size_t>(cfg.window);
  std::uniform_int_distribution<std::size_t> offset_dist(0, T);
  DatasetSplit out;
  const SplitRatios ratios{train_fraction, 0.0, 1.0 - train_fraction};
  for (int f = cfg.f_min; f <= cfg.f_max; f += frequency_step) {
    std::vector<TimeSeriesWindow> windows;
    for (int i = 0; i < n_phases; ++i) {
      const double phase = phase_dist(rng);
      const std::size_t off = offset_dist(rng);
      const auto source = make_sinusoid(f, cfg.fs, 2 * T, phase);
      TimeSeriesWindow w;
      w.samples.assign(source.begin() + static_cast<std::ptrdiff_t>(off),
                       source.begin() + static_cast<std::ptrdiff_t>(off + T));
      w.frequency = f;
      w.phase = phase;
      w.source_offset = static_cast<std::int64_t>(off);
      windows.push_back(std::move(w));
    }
    const std::size_t n_train = n_phases == 1
                                    ? (train_fraction >= 0.5 ? 1u : 0u)
                                    : allocate(windows.size(), ratios).train;
    for (std::size_t i = 0; i < windows.size(); ++i)
      append(i < n_train ? out.train : out.test, std::move(windows[i]), f);
  }
  return out;
}

double spectral_predictability(std::span<const double> x) {
  if (x.empty()) throw DomainError("spectral predictability of an empty series");
  const auto power = power_spectrum(x);
  const double total = std::accumulate(power.begin(), power.end(), 0.0);
  if (!(total > 0.0) || power.size() < 2) return 0.0;
  double entropy = 0.0;
  for (double p : power) {
    const double q = p / total;
    if (q > 0.0) entropy -= q * std::log(q);
  }
  const double h_max = std::log(static_cast<double>(power.size()));
  return std::clamp(1.0 - entropy / h_max, 0.0, 1.0);
}

}  // namespace freqprobe
