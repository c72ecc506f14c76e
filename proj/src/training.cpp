#include "freqprobe/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "freqprobe/errors.hpp"

namespace freqprobe {

namespace {

struct NormalizedBatch {
  Eigen::MatrixXf contexts;
  Eigen::MatrixXf targets;
};

NormalizedBatch normalize_batch(const Eigen::MatrixXd& windows, const ModelConfig& cfg) {
  const Eigen::Index n = windows.rows();
  NormalizedBatch b{Eigen::MatrixXf(n, cfg.context), Eigen::MatrixXf(n, cfg.horizon)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd ctx = windows.row(i).head(cfg.context).transpose();
    const auto norm = instance_normalize(std::span<const double>(ctx.data(), ctx.size()),
                                         cfg.epsilon);
    const double scale = std::max(norm.std, cfg.epsilon);
    for (Eigen::Index t = 0; t < cfg.context; ++t)
      b.contexts(i, t) = static_cast<float>(norm.values[static_cast<std::size_t>(t)]);
    for (Eigen::Index t = 0; t < cfg.horizon; ++t)
      b.targets(i, t) = static_cast<float>((windows(i, cfg.context + t) - norm.mean) / scale);
  }
  return b;
}

void check_windows(const Eigen::MatrixXd& windows, const ModelConfig& cfg) {
  if (windows.cols() != cfg.context + cfg.horizon)
    throw DimensionError("training windows must have context + horizon columns");
  if (windows.rows() == 0) throw DomainError("empty training set");
}

class Adam {
 public:
  Adam(std::vector<nn::Parameter>& params, double weight_decay)
      : params_(params), weight_decay_(weight_decay) {
    for (const auto& p : params) {
      m_.push_back(nn::Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(nn::Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }

  void step(double lr) {
    ++t_;
    const float b1 = 0.9f, b2 = 0.999f, eps = 1e-8f;
    const float c1 = 1.0f - std::pow(b1, static_cast<float>(t_));
    const float c2 = 1.0f - std::pow(b2, static_cast<float>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      if (p.grad.size() == 0) continue;
      m_[i] = b1 * m_[i] + (1.0f - b1) * p.grad;
      v_[i] = b2 * v_[i] + (1.0f - b2) * p.grad.cwiseProduct(p.grad);
      const nn::Matrix update =
          ((m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps)).matrix();
      if (weight_decay_ > 0.0) p.value *= static_cast<float>(1.0 - lr * weight_decay_);
      p.value -= static_cast<float>(lr) * update;
    }
  }

 private:
  std::vector<nn::Parameter>& params_;
  double weight_decay_;
  std::vector<nn::Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace

Eigen::MatrixXd make_training_corpus(const SignalConfig& signal, int context, int horizon,
                                     std::size_t count, std::uint64_t seed) {
  signal.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> freq(signal.f_min, signal.f_max);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const auto length = static_cast<std::size_t>(context + horizon);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), context + horizon);
  for (std::size_t i = 0; i < count; ++i) {
    const int f = freq(rng);
    const auto x = make_sinusoid(f, signal.fs, length, phase(rng));
    for (std::size_t t = 0; t < length; ++t)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = x[t];
  }
  return out;
}

double quantile_batch_loss(const SurrogateForecaster& model, const Eigen::MatrixXd& windows) {
  const ModelConfig& cfg = model.config();
  check_windows(windows, cfg);
  const ForwardResult res = model.forward(windows.leftCols(cfg.context));
  double total = 0.0;
  const auto nq = cfg.quantiles.size();
  for (Eigen::Index i = 0; i < windows.rows(); ++i) {
    const auto& f = res.forecasts[static_cast<std::size_t>(i)];
    const double mu = res.mean[static_cast<std::size_t>(i)];
    const double sc = res.scale[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < cfg.horizon; ++t) {
      const double target = (windows(i, cfg.context + t) - mu) / sc;
      for (std::size_t q = 0; q < nq; ++q)
        total += pinball_loss(cfg.quantiles[q],
                              target - (f(t, static_cast<Eigen::Index>(q)) - mu) / sc);
    }
  }
  return total / static_cast<double>(windows.rows() * cfg.horizon * static_cast<Eigen::Index>(nq));
}

TrainReport train_quantile(SurrogateForecaster& model, const Eigen::MatrixXd& windows,
                           const TrainConfig& cfg, const std::function<void(int, double)>& on_epoch) {
  const ModelConfig& mc = model.config();
  check_windows(windows, mc);
  if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.lr > 0.0))
    throw DomainError("invalid training configuration");
  std::mt19937_64 rng(cfg.seed);
  auto& params = model.parameters();
  Adam adam(params, cfg.weight_decay);
  const Eigen::Index n = windows.rows();
  const auto nq = static_cast<Eigen::Index>(mc.quantiles.size());
  const std::size_t batches_per_epoch =
      static_cast<std::size_t>((n + cfg.batch_size - 1) / cfg.batch_size);
  const double total_steps = static_cast<double>(batches_per_epoch) * cfg.epochs;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  TrainReport report;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t bi = 0; bi < batches_per_epoch; ++bi) {
      const std::size_t start = bi * static_cast<std::size_t>(cfg.batch_size);
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Eigen::MatrixXd rows(static_cast<Eigen::Index>(stop - start), windows.cols());
      for (std::size_t k = start; k < stop; ++k)
        rows.row(static_cast<Eigen::Index>(k - start)) = windows.row(order[k]);
      const NormalizedBatch batch = normalize_batch(rows, mc);

      for (auto& p : params) p.zero_grad();
      nn::Tape tape(true);
      const nn::Var out = model.build_graph(tape, batch.contexts, &rng);
      const nn::Matrix& pred = tape.value(out);
      const double count = static_cast<double>(pred.size());
      nn::Matrix seed(pred.rows(), pred.cols());
      double loss = 0.0;
      for (Eigen::Index i = 0; i < pred.rows(); ++i) {
        for (Eigen::Index t = 0; t < mc.horizon; ++t) {
          for (Eigen::Index q = 0; q < nq; ++q) {
            const double tau = mc.quantiles[static_cast<std::size_t>(q)];
            const double e = batch.targets(i, t) - pred(i, t * nq + q);
            loss += pinball_loss(tau, e);
            seed(i, t * nq + q) = static_cast<float>((e > 0.0 ? -tau : 1.0 - tau) / count);
          }
        }
      }
      loss /= count;
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training diverged: non-finite loss at epoch " << epoch << ", batch " << bi
            << " (lr " << cfg.lr << ")";
        throw NumericalError(msg.str());
      }
      tape.backward(out, seed);

      double norm2 = 0.0;
      for (const auto& p : params) norm2 += p.grad.squaredNorm();
      const double norm = std::sqrt(norm2);
      if (!std::isfinite(norm)) throw NumericalError("training diverged: non-finite gradient");
      if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip)
        for (auto& p : params) p.grad *= static_cast<float>(cfg.grad_clip / norm);

      const double step = static_cast<double>(report.steps);
      double lr = cfg.lr;
      if (step < cfg.warmup_steps)
        lr *= (step + 1.0) / cfg.warmup_steps;
      else
        lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, step / total_steps)));
      adam.step(std::max(lr, 0.02 * cfg.lr));
      ++report.steps;
      epoch_loss += loss * static_cast<double>(stop - start);
    }
    report.epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, report.epoch_loss.back());
  }
  return report;
}

double median_forecast_mse(const SurrogateForecaster& model, const Eigen::MatrixXd& windows) {
  const ModelConfig& cfg = model.config();
  check_windows(windows, cfg);
  const ForwardResult res = model.forward(windows.leftCols(cfg.context));
  const auto median = static_cast<Eigen::Index>(cfg.median_index());
  double total = 0.0;
  for (Eigen::Index i = 0; i < windows.rows(); ++i) {
    const auto& f = res.forecasts[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t < cfg.horizon; ++t) {
      const double e = windows(i, cfg.context + t) - f(t, median);
      total += e * e;
    }
  }
  return total / static_cast<double>(windows.rows() * cfg.horizon);
}

}  // namespace freqprobe
