#pragma once

// Desk-scale patch-based encoder-decoder forecaster with five probe taps:
// after decoder blocks 0-3 ("dec0".."dec3") and the final d_model state fed
// to the quantile projection ("out").

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/autograd.hpp"
#include "freqprobe/tensor_store.hpp"

namespace freqprobe {

enum class TapPooling { Final, Mean };

struct ModelConfig {
  int context = 512;   ///< T
  int patch = 16;      ///< P
  int stride = 16;     ///< S, must equal P
  int d_model = 64;
  int d_ff = 128;
  int n_enc = 4;
  int n_dec = 4;
  int n_heads = 4;
  int horizon = 64;    ///< O
  int decoder_tokens = 1;
  std::vector<double> quantiles = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double dropout = 0.05;
  double epsilon = 1e-5;
  TapPooling pooling = TapPooling::Final;
  std::uint64_t seed = 0;

  /// Throws DomainError on an inconsistent configuration.
  void validate() const;
  int num_patches() const { return context / patch; }
  std::size_t median_index() const;
};

inline constexpr std::size_t kNumTaps = 5;

/// Non-overlapping patches; throws DomainError unless length % P == 0.
std::vector<std::vector<double>> patchify(std::span<const double> x, int patch,
                                          int stride);

/// f mod (fs / P) == 0: the sinusoid repeats exactly once per patch.
bool aliasing_predictor(int f, int fs, int patch);

/// Weights of the patch embedding residual block.
struct ResidualEmbedWeights {
  Eigen::MatrixXf hidden_w;  ///< d_ff x P
  Eigen::VectorXf hidden_b;
  Eigen::MatrixXf out_w;     ///< d_model x d_ff
  Eigen::VectorXf out_b;
  Eigen::MatrixXf skip_w;    ///< d_model x P
  Eigen::VectorXf skip_b;
  Eigen::VectorXf ln_gain;
  Eigen::VectorXf ln_bias;
};

/// layernorm(W_o sigmoid(W_m x + b_m) + b_o + W_r x + b_r), inference mode.
Eigen::VectorXf residual_embed(const Eigen::VectorXf& patch,
                               const ResidualEmbedWeights& w, float eps = 1e-5f);

struct ForwardResult {
  /// Per window, horizon x |quantiles|, de-normalised and sorted per row.
  std::vector<Eigen::MatrixXd> forecasts;
  /// Per tap, (batch * decoder_tokens) x d_model, post-erasure values.
  std::array<Eigen::MatrixXf, kNumTaps> taps;
  std::vector<double> mean;
  std::vector<double> scale;
};

/// Anything that exposes tap activations and closed-loop generation under a
/// set of erasers. Contexts are one window per row.
class TappedModel {
 public:
  virtual ~TappedModel() = default;
  virtual std::size_t d_model() const = 0;
  virtual Eigen::MatrixXd tap_features(const Eigen::MatrixXd& contexts,
                                       std::size_t tap,
                                       std::span<const ErasureRecord> erasers) const = 0;
  virtual Eigen::MatrixXd generate(const Eigen::MatrixXd& contexts, int total,
                                   std::span<const ErasureRecord> erasers) const = 0;
};

class SurrogateForecaster : public TappedModel {
 public:
  explicit SurrogateForecaster(ModelConfig cfg);
  SurrogateForecaster(const SurrogateForecaster& other);
  SurrogateForecaster& operator=(const SurrogateForecaster& other);
  SurrogateForecaster(SurrogateForecaster&& other) noexcept;
  SurrogateForecaster& operator=(SurrogateForecaster&& other) noexcept;

  const ModelConfig& config() const { return cfg_; }
  std::size_t d_model() const override { return static_cast<std::size_t>(cfg_.d_model); }

  ForwardResult forward(const Eigen::MatrixXd& contexts,
                        std::span<const ErasureRecord> erasers = {}) const;

  /// Same as forward() but with explicit decoder input tokens
  /// ((batch * decoder_tokens) x d_model) in place of the learned start tokens.
  ForwardResult forward_with_decoder_inputs(const Eigen::MatrixXd& contexts,
                                            const Eigen::MatrixXf& decoder_inputs,
                                            std::span<const ErasureRecord> erasers = {}) const;

  /// Probe features: one row per window, pooled over decoder positions.
  Eigen::MatrixXd tap_features(const Eigen::MatrixXd& contexts, std::size_t tap,
                               std::span<const ErasureRecord> erasers) const override;
  std::array<Eigen::MatrixXd, kNumTaps> all_tap_features(
      const Eigen::MatrixXd& contexts, std::span<const ErasureRecord> erasers = {}) const;

  /// Closed-loop median generation; total must be a multiple of the horizon.
  Eigen::MatrixXd generate(const Eigen::MatrixXd& contexts, int total,
                           std::span<const ErasureRecord> erasers) const override;

  /// Number of forward passes issued by generate() since construction.
  std::size_t forward_calls() const { return forward_calls_.load(); }

  std::vector<nn::Parameter>& parameters() { return params_; }
  const std::vector<nn::Parameter>& parameters() const { return params_; }

  /// Normalised-space quantile predictions on a recording tape, for training.
  /// Returns (batch x horizon*|quantiles|) node; column index = t*|Q| + q.
  nn::Var build_graph(nn::Tape& tape, const Eigen::MatrixXf& normalized_contexts,
                      std::mt19937_64* dropout_rng);

  void save(const std::filesystem::path& path) const;
  static SurrogateForecaster load(const std::filesystem::path& path);

  ResidualEmbedWeights embed_weights() const;

 private:
  struct Graph;
  using WeightLookup = std::function<nn::Var(const std::string&)>;
  Graph run(nn::Tape& tape, const WeightLookup& weight,
            const Eigen::MatrixXf& normalized_contexts,
            const Eigen::MatrixXf* decoder_inputs,
            std::span<const ErasureRecord> erasers, std::mt19937_64* dropout_rng) const;
  ForwardResult finish(const Eigen::MatrixXd& contexts, const Eigen::MatrixXf* decoder_inputs,
                       std::span<const ErasureRecord> erasers) const;
  void add_param(const std::string& name, Eigen::Index rows, Eigen::Index cols, float stddev,
                 float fill, std::mt19937_64& rng);
  std::size_t index_of(const std::string& name) const;

  ModelConfig cfg_;
  std::vector<nn::Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
  mutable std::atomic<std::size_t> forward_calls_{0};
};

/// Mean pinball loss over all entries of (target - prediction).
double pinball_loss(double q, double error);

}  // namespace freqprobe
