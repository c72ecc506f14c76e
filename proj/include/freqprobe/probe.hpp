#pragma once

// Online prequential-MDL linear probes.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/signal.hpp"
#include "freqprobe/tensor_store.hpp"

namespace freqprobe {

struct ProbeConfig {
  int replay_streams = 3;
  double ema_decay = 0.02;
  double reset_prob = 0.05;
  double noise_level = 0.05;
  int batch_size = 128;
  double lr = 0.5;  ///< logit change per step; weight steps are scaled by 1 / mean |h|_1
  double weight_decay = 1e-4;
  double dropout = 0.2;
  int steps_per_batch = 4;
  std::size_t replay_capacity = 2048;  ///< per stream
  std::uint64_t seed = 0;

  /// Throws DomainError when a field leaves its admissible range.
  void validate() const;
};

/// Softmax regression: logits = W h + b.
struct LinearProbe {
  Eigen::MatrixXd weight;  ///< classes x d
  Eigen::VectorXd bias;

  LinearProbe() = default;
  LinearProbe(std::size_t classes, std::size_t dim);
  std::size_t classes() const { return static_cast<std::size_t>(bias.size()); }
  /// Row-wise log-probabilities (natural log).
  Eigen::MatrixXd log_probs(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

/// -sum log2 p(y | x) under the probe.
double codelength_bits(const LinearProbe& probe, const Eigen::MatrixXd& x,
                       const std::vector<int>& y);

struct ProbeBatch {
  Eigen::MatrixXd x;
  std::vector<int> y;
};

enum class ProbeEvent { Evaluate, Update };

struct PrequentialResult {
  double codelength = 0.0;             ///< bits
  std::vector<double> batch_bits;
  LinearProbe probe;
  std::size_t samples = 0;
};

/// Each batch is scored by the parameters fitted on the batches before it,
/// then used (with replayed older samples) for an update. `observer` sees
/// every Evaluate/Update event with its batch index.
PrequentialResult prequential_fit(const std::vector<ProbeBatch>& batches, std::size_t classes,
                                  const ProbeConfig& cfg,
                                  const std::function<void(ProbeEvent, std::size_t)>& observer = {});

/// Counts updates on batch k that are not preceded by the evaluation of batch k,
/// or evaluations of k issued after an update on k.
class PrequentialAudit {
 public:
  void operator()(ProbeEvent e, std::size_t batch);
  std::size_t violations() const { return violations_; }
  std::size_t events() const { return events_; }

 private:
  std::vector<std::uint8_t> state_;  // 0 unseen, 1 evaluated, 2 updated
  std::size_t violations_ = 0;
  std::size_t events_ = 0;
};

/// 1 - L / L_uniform. Throws DomainError unless L_uniform > 0.
double space_saving(double codelength, double uniform_codelength);

struct ProbeReport {
  std::string task;  ///< band task name, or "freq" for frequency identity
  std::string tap;
  double codelength_total = 0.0;
  double codelength_uniform = 0.0;
  double space_saving = 0.0;
  double accuracy = 0.0;
  std::map<int, double> per_frequency_accuracy;
  std::size_t classes = 0;
  std::size_t stream_samples = 0;
  std::size_t test_samples = 0;
  bool is_control = false;
};

/// Frequency identity when `band` is empty; otherwise the binary band task with
/// labels recomputed from the window frequencies and out-of-band rows dropped.
/// `split` assigns each row to train (0), validation (1) or test (2); when
/// absent a 70/15/15 split stratified by frequency is drawn under cfg.seed.
ProbeReport run_probe(const ActivationSet& set, const std::optional<BandTask>& band,
                      const ProbeConfig& cfg, bool control,
                      const std::vector<std::uint8_t>* split = nullptr);

/// Frequencies whose test accuracy is below `threshold`, ascending.
std::vector<int> degradation_gap(const ProbeReport& report, double threshold);

}  // namespace freqprobe
