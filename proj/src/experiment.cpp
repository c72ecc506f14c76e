#include "freqprobe/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include "freqprobe/errors.hpp"

namespace freqprobe {

std::vector<TapSubset> standard_tap_subsets() {
  return {{0}, {1}, {2}, {3}, {4}, {0, 1}, {0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2, 3, 4},
          {1, 2, 3, 4}, {2, 3, 4}, {3, 4}};
}

std::string subset_label(const TapSubset& subset) {
  if (subset.empty()) return "baseline";
  std::string s;
  for (auto t : subset) s += std::to_string(t);
  return s;
}

TapSubset parse_subset(const std::string& label) {
  if (label.empty()) throw DomainError("empty tap subset");
  TapSubset out;
  for (char c : label) {
    if (c < '0' || c >= '0' + static_cast<int>(kNumTaps))
      throw DomainError("tap subset '" + label + "' names an unknown tap");
    const auto t = static_cast<std::size_t>(c - '0');
    if (!out.empty() && t <= out.back())
      throw DomainError("tap subset '" + label + "' must list taps in increasing order");
    out.push_back(t);
  }
  return out;
}

Eigen::MatrixXd stack_windows(const LabeledWindows& set) {
  if (set.windows.empty()) return {};
  const auto T = static_cast<Eigen::Index>(set.windows.front().samples.size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(set.size()), T);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& s = set.windows[i].samples;
    if (static_cast<Eigen::Index>(s.size()) != T) throw DimensionError("windows differ in length");
    for (Eigen::Index t = 0; t < T; ++t) out(static_cast<Eigen::Index>(i), t) = s[static_cast<std::size_t>(t)];
  }
  return out;
}

std::vector<double> dominant_frequencies(const Eigen::MatrixXd& generated, double fs) {
  std::vector<double> out(static_cast<std::size_t>(generated.rows()));
  std::vector<double> row(static_cast<std::size_t>(generated.cols()));
  for (Eigen::Index i = 0; i < generated.rows(); ++i) {
    for (Eigen::Index t = 0; t < generated.cols(); ++t) row[static_cast<std::size_t>(t)] = generated(i, t);
    out[static_cast<std::size_t>(i)] = dominant_frequency(row, fs);
  }
  return out;
}

namespace {

struct TaskRows {
  Eigen::MatrixXd contexts;
  std::vector<int> labels;
  std::vector<double> freqs;
};

TaskRows task_rows(const LabeledWindows& set, const BandTask& task) {
  TaskRows r;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const BandLabel l = label_window(task, set.windows[i].frequency);
    if (l == BandLabel::Excluded) continue;
    keep.push_back(i);
    r.labels.push_back(static_cast<int>(l));
    r.freqs.push_back(set.windows[i].frequency);
  }
  if (keep.empty()) return r;
  const auto T = static_cast<Eigen::Index>(set.windows[keep.front()].samples.size());
  r.contexts.resize(static_cast<Eigen::Index>(keep.size()), T);
  for (std::size_t j = 0; j < keep.size(); ++j)
    for (Eigen::Index t = 0; t < T; ++t)
      r.contexts(static_cast<Eigen::Index>(j), t) = set.windows[keep[j]].samples[static_cast<std::size_t>(t)];
  return r;
}

std::vector<double> squared_errors(const TappedModel& model, const TaskRows& test,
                                   std::span<const ErasureRecord> erasers, int length, double fs,
                                   double* rmse) {
  const Eigen::MatrixXd gen = model.generate(test.contexts, length, erasers);
  const std::vector<double> fhat = dominant_frequencies(gen, fs);
  std::vector<FrequencyPair> pairs;
  for (std::size_t i = 0; i < fhat.size(); ++i) pairs.push_back({test.freqs[i], fhat[i]});
  const SpectralScore score = spectral_rmse(pairs);
  *rmse = score.rmse;
  std::vector<double> out;
  for (const auto& e : score.per_window) out.push_back(e.squared_error);
  return out;
}

}  // namespace

std::vector<ErasureRow> erasure_experiment(const TappedModel& model, const DatasetSplit& data,
                                           const BandTask& task,
                                           const std::vector<TapSubset>& subsets,
                                           const ErasureOptions& opt) {
  const TaskRows train = task_rows(data.train, task);
  const TaskRows test = task_rows(data.test, task);
  if (train.labels.empty() || test.labels.empty())
    throw DomainError("erasure experiment: train and test must contain in-band windows");
  const double fs = opt.fs;
  const Eigen::MatrixXd Y = binary_concept(train.labels);

  std::vector<ErasureRow> rows;
  ErasureRow base;
  base.subset = subset_label({});
  base.squared_errors = squared_errors(model, test, {}, opt.generate_length, fs, &base.rmse);
  rows.push_back(base);

  for (const auto& subset : subsets) {
    ErasureRow row;
    row.subset = subset_label(subset);
    row.erasers = fit_sequential(model, subset, train.contexts, Y, opt.leace);
    const auto records = to_records(row.erasers);
    row.squared_errors = squared_errors(model, test, records, opt.generate_length, fs, &row.rmse);
    row.p_value = wilcoxon_paired_two_sided(base.squared_errors, row.squared_errors);
    row.significant = *row.p_value < opt.alpha;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<IoPoint> input_output_curve(const Generator& gen, const std::vector<int>& frequencies,
                                        int n_windows, int fs, int context, std::uint64_t seed) {
  if (n_windows < 1) throw DomainError("input_output_curve: n_windows must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<IoPoint> out;
  for (int f : frequencies) {
    Eigen::MatrixXd ctx(n_windows, context);
    for (int i = 0; i < n_windows; ++i) {
      const auto x = make_sinusoid(f, fs, static_cast<std::size_t>(context), phase(rng));
      for (int t = 0; t < context; ++t) ctx(i, t) = x[static_cast<std::size_t>(t)];
    }
    const std::vector<double> fhat = dominant_frequencies(gen(ctx), fs);
    double mean = 0.0;
    for (double v : fhat) mean += v;
    mean /= static_cast<double>(fhat.size());
    double var = 0.0;
    for (double v : fhat) var += (v - mean) * (v - mean);
    var /= static_cast<double>(fhat.size());
    out.push_back({f, mean, std::sqrt(var)});
  }
  return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  return out;
}

}  // namespace

void write_sv_csv(const std::filesystem::path& path, const std::vector<ProbeReport>& truth,
                  const std::vector<ProbeReport>& control) {
  std::map<std::pair<std::string, std::string>, double> ctrl;
  for (const auto& c : control) ctrl[{c.tap, c.task}] = c.space_saving;
  auto out = open_csv(path);
  out << "layer,task,sv,sv_control,accuracy\n";
  for (const auto& r : truth) {
    out << r.tap << ',' << r.task << ',' << r.space_saving << ',';
    if (auto it = ctrl.find({r.tap, r.task}); it != ctrl.end()) out << it->second;
    out << ',' << r.accuracy << '\n';
  }
}

void write_accuracy_csv(const std::filesystem::path& path, const std::vector<ProbeReport>& reports,
                        const std::vector<BandTask>& tasks, int f_min, int f_max) {
  auto out = open_csv(path);
  out << "task,layer,f_hz,accuracy\n";
  for (const auto& r : reports) {
    const BandTask* task = nullptr;
    for (const auto& t : tasks)
      if (t.name == r.task) task = &t;
    for (int f = f_min; f <= f_max; ++f) {
      out << r.task << ',' << r.tap << ',' << f << ',';
      const bool in_band = task == nullptr || label_window(*task, f) != BandLabel::Excluded;
      const auto it = r.per_frequency_accuracy.find(f);
      if (!in_band)
        out << "excluded";
      else if (it == r.per_frequency_accuracy.end())
        out << "missing";
      else
        out << it->second;
      out << '\n';
    }
  }
}

void write_erasure_csv(const std::filesystem::path& path, const std::vector<ErasureRow>& rows) {
  auto out = open_csv(path);
  out << "subset,rmse,p_value,significant,n\n";
  for (const auto& r : rows) {
    out << r.subset << ',' << r.rmse << ',';
    if (r.p_value) out << *r.p_value;
    out << ',' << (r.p_value ? (r.significant ? "true" : "false") : "") << ','
        << r.squared_errors.size() << '\n';
  }
}

void write_io_csv(const std::filesystem::path& path, const std::vector<IoPoint>& points) {
  auto out = open_csv(path);
  out << "f,mean_fhat,std_fhat\n";
  for (const auto& p : points) out << p.f << ',' << p.mean << ',' << p.std << '\n';
}

std::size_t worker_count() {
  if (const char* env = std::getenv("FREQPROBE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        {
          std::lock_guard lock(error_mutex);
          if (error) return;
        }
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace freqprobe
