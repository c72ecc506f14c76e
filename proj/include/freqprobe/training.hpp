#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/forecaster.hpp"
#include "freqprobe/signal.hpp"

namespace freqprobe {

struct TrainConfig {
  int epochs = 8;
  int batch_size = 32;
  double lr = 3e-3;
  double weight_decay = 0.0;
  double grad_clip = 1.0;
  int warmup_steps = 200;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;  ///< mean pinball loss per epoch
  std::size_t steps = 0;
};

/// Random-frequency, random-phase sinusoids of length context + horizon, one
/// per row, frequencies drawn uniformly from the integer band.
Eigen::MatrixXd make_training_corpus(const SignalConfig& signal, int context, int horizon,
                                     std::size_t count, std::uint64_t seed);

/// Mean pinball loss of one batch in normalised space. `windows` rows hold
/// context followed by target; targets use the context's (mu, sigma).
double quantile_batch_loss(const SurrogateForecaster& model, const Eigen::MatrixXd& windows);

/// Adam on the mean pinball loss with linear warm-up and cosine decay.
/// Throws NumericalError if the loss turns non-finite.
TrainReport train_quantile(SurrogateForecaster& model, const Eigen::MatrixXd& windows,
                           const TrainConfig& cfg,
                           const std::function<void(int, double)>& on_epoch = {});

/// Mean squared error of the median forecast against the target, original units.
double median_forecast_mse(const SurrogateForecaster& model, const Eigen::MatrixXd& windows);

}  // namespace freqprobe
