#pragma once

// Small deterministic TappedModel: five tanh layers over the raw context,
// erasers applied after each layer. Generation emits a sinusoid at the
// frequency decoded linearly from the final tap.

#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/forecaster.hpp"
#include "freqprobe/tensor_store.hpp"

class FakeTappedModel : public freqprobe::TappedModel {
 public:
  FakeTappedModel(int context, int d, std::uint64_t seed) : d_(d) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    auto rand = [&](int r, int c, double s) {
      return Eigen::MatrixXd(Eigen::MatrixXd::NullaryExpr(r, c, [&]() { return s * g(rng); }));
    };
    layers_.push_back(rand(d, context, 1.0 / std::sqrt(static_cast<double>(context))));
    for (std::size_t t = 1; t < freqprobe::kNumTaps; ++t)
      layers_.push_back(rand(d, d, 1.2 / std::sqrt(static_cast<double>(d))));
    readout_ = rand(1, d, 1.0);
  }

  std::size_t d_model() const override { return static_cast<std::size_t>(d_); }

  Eigen::MatrixXd tap_features(const Eigen::MatrixXd& contexts, std::size_t tap,
                               std::span<const freqprobe::ErasureRecord> erasers) const override {
    return run(contexts, erasers)[tap];
  }

  Eigen::MatrixXd generate(const Eigen::MatrixXd& contexts, int total,
                           std::span<const freqprobe::ErasureRecord> erasers) const override {
    const Eigen::MatrixXd h = run(contexts, erasers)[freqprobe::kNumTaps - 1];
    Eigen::MatrixXd out(contexts.rows(), total);
    for (Eigen::Index i = 0; i < contexts.rows(); ++i) {
      const double f = std::clamp(std::round(40.0 + 30.0 * (readout_ * h.row(i).transpose())(0)), 1.0, 255.0);
      for (int t = 0; t < total; ++t) out(i, t) = std::sin(2.0 * std::numbers::pi * f * t / 512.0);
    }
    return out;
  }

  std::vector<Eigen::MatrixXd> run(const Eigen::MatrixXd& x,
                                   std::span<const freqprobe::ErasureRecord> erasers) const {
    std::vector<Eigen::MatrixXd> taps;
    Eigen::MatrixXd h = x;
    for (std::size_t t = 0; t < freqprobe::kNumTaps; ++t) {
      h = (h * layers_[t].transpose()).array().tanh().matrix();
      for (const auto& e : erasers)
        if (freqprobe::tap_index(e.layer_tap) == t) {
          e.check_dim(d_model());
          h = ((h * e.P.transpose()).rowwise() + e.b.transpose()).eval();
        }
      taps.push_back(h);
    }
    return taps;
  }

 private:
  int d_;
  std::vector<Eigen::MatrixXd> layers_;
  Eigen::MatrixXd readout_;
};
