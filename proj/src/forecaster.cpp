#include "freqprobe/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "json.hpp"

#include "freqprobe/errors.hpp"
#include "freqprobe/signal.hpp"

namespace freqprobe {

using nn::Matrix;
using nn::Tape;
using nn::Var;

namespace {

constexpr Eigen::Index kInferenceChunk = 128;

}  // namespace

void ModelConfig::validate() const {
  if (patch <= 0 || stride != patch)
    throw DomainError("patches must be non-overlapping (stride == patch > 0)");
  if (context <= 0 || context % patch != 0)
    throw DomainError("context length must be a positive multiple of the patch length");
  if (d_model <= 0 || d_ff <= 0 || n_heads <= 0 || d_model % n_heads != 0)
    throw DomainError("d_model must be positive and divisible by n_heads");
  if (n_enc < 0 || n_dec != 4)
    throw DomainError("the decoder must have exactly 4 blocks to expose dec0..dec3");
  if (horizon <= 0) throw DomainError("horizon must be positive");
  if (decoder_tokens < 1) throw DomainError("decoder_tokens must be >= 1");
  if (quantiles.empty()) throw DomainError("quantile list is empty");
  for (std::size_t i = 0; i < quantiles.size(); ++i) {
    if (!(quantiles[i] > 0.0 && quantiles[i] < 1.0))
      throw DomainError("quantiles must lie in (0, 1)");
    if (i > 0 && quantiles[i] <= quantiles[i - 1])
      throw DomainError("quantiles must be strictly increasing");
  }
  median_index();
  if (dropout < 0.0 || dropout >= 1.0) throw DomainError("dropout must lie in [0, 1)");
  if (epsilon <= 0.0) throw DomainError("epsilon must be positive");
}

std::size_t ModelConfig::median_index() const {
  for (std::size_t i = 0; i < quantiles.size(); ++i)
    if (std::abs(quantiles[i] - 0.5) < 1e-12) return i;
  throw DomainError("quantile list must contain the median 0.5");
}

std::vector<std::vector<double>> patchify(std::span<const double> x, int patch, int stride) {
  if (patch <= 0 || stride != patch)
    throw DomainError("patchify supports non-overlapping patches only (stride == patch)");
  if (x.size() % static_cast<std::size_t>(patch) != 0)
    throw DomainError("series length " + std::to_string(x.size()) +
                      " is not divisible by the patch length " + std::to_string(patch));
  std::vector<std::vector<double>> out;
  for (std::size_t start = 0; start < x.size(); start += static_cast<std::size_t>(patch))
    out.emplace_back(x.begin() + static_cast<std::ptrdiff_t>(start),
                     x.begin() + static_cast<std::ptrdiff_t>(start + patch));
  return out;
}

bool aliasing_predictor(int f, int fs, int patch) {
  if (patch <= 0 || fs % patch != 0) return false;
  const int patch_rate = fs / patch;
  return patch_rate > 0 && f % patch_rate == 0;
}

Eigen::VectorXf residual_embed(const Eigen::VectorXf& patch, const ResidualEmbedWeights& w,
                               float eps) {
  if (w.hidden_w.cols() != patch.size() || w.skip_w.cols() != patch.size() ||
      w.out_w.cols() != w.hidden_w.rows() || w.out_w.rows() != w.skip_w.rows() ||
      w.hidden_b.size() != w.hidden_w.rows() || w.out_b.size() != w.out_w.rows() ||
      w.skip_b.size() != w.skip_w.rows() || w.ln_gain.size() != w.out_w.rows() ||
      w.ln_bias.size() != w.out_w.rows())
    throw DimensionError("residual_embed: weight shapes disagree with the patch");
  const Eigen::VectorXf m =
      ((-(w.hidden_w * patch + w.hidden_b).array()).exp() + 1.0f).inverse().matrix();
  const Eigen::VectorXf o = w.out_w * m + w.out_b;
  const Eigen::VectorXf r = w.skip_w * patch + w.skip_b;
  const Eigen::VectorXf s = o + r;
  const float mean = s.mean();
  const float var = (s.array() - mean).square().mean();
  const float rstd = 1.0f / std::sqrt(var + eps);
  return (((s.array() - mean) * rstd) * w.ln_gain.array() + w.ln_bias.array()).matrix();
}

double pinball_loss(double q, double error) {
  return std::max(q * error, (q - 1.0) * error);
}

// ---------------------------------------------------------------------------

struct SurrogateForecaster::Graph {
  Var output;
  std::array<Var, kNumTaps> taps;
};

void SurrogateForecaster::add_param(const std::string& name, Eigen::Index rows,
                                    Eigen::Index cols, float stddev, float fill,
                                    std::mt19937_64& rng) {
  nn::Parameter p;
  p.name = name;
  if (stddev > 0.0f) {
    std::normal_distribution<float> dist(0.0f, stddev);
    p.value = Matrix::NullaryExpr(rows, cols, [&]() { return dist(rng); });
  } else {
    p.value = Matrix::Constant(rows, cols, fill);
  }
  index_[name] = params_.size();
  params_.push_back(std::move(p));
}

SurrogateForecaster::SurrogateForecaster(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  const Eigen::Index d = cfg_.d_model, ff = cfg_.d_ff, P = cfg_.patch;
  const Eigen::Index out = cfg_.horizon * static_cast<Eigen::Index>(cfg_.quantiles.size());
  auto fan = [](Eigen::Index n) { return 1.0f / std::sqrt(static_cast<float>(n)); };

  add_param("embed.w_m", P, ff, fan(P), 0, rng);
  add_param("embed.b_m", 1, ff, 0, 0, rng);
  add_param("embed.w_o", ff, d, fan(ff), 0, rng);
  add_param("embed.b_o", 1, d, 0, 0, rng);
  add_param("embed.w_r", P, d, fan(P), 0, rng);
  add_param("embed.b_r", 1, d, 0, 0, rng);
  add_param("embed.ln_g", 1, d, 0, 1, rng);
  add_param("embed.ln_b", 1, d, 0, 0, rng);
  add_param("enc.pos", cfg_.num_patches(), d, 0.1f, 0, rng);

  auto attention_block = [&](const std::string& prefix) {
    for (const char* w : {"wq", "wk", "wv", "wo"}) add_param(prefix + w, d, d, fan(d), 0, rng);
  };
  auto norm = [&](const std::string& prefix) {
    add_param(prefix + "_g", 1, d, 0, 1, rng);
    add_param(prefix + "_b", 1, d, 0, 0, rng);
  };
  auto feed_forward = [&](const std::string& prefix) {
    add_param(prefix + "w1", d, ff, fan(d), 0, rng);
    add_param(prefix + "b1", 1, ff, 0, 0, rng);
    add_param(prefix + "w2", ff, d, fan(ff), 0, rng);
    add_param(prefix + "b2", 1, d, 0, 0, rng);
  };

  for (int i = 0; i < cfg_.n_enc; ++i) {
    const std::string p = "enc" + std::to_string(i) + ".";
    norm(p + "ln1");
    attention_block(p + "sa_");
    norm(p + "ln2");
    feed_forward(p + "ff_");
  }
  norm("enc.final");
  add_param("dec.start", cfg_.decoder_tokens, d, 0.1f, 0, rng);
  for (int i = 0; i < cfg_.n_dec; ++i) {
    const std::string p = "dec" + std::to_string(i) + ".";
    norm(p + "ln1");
    attention_block(p + "sa_");
    norm(p + "ln2");
    attention_block(p + "ca_");
    norm(p + "ln3");
    feed_forward(p + "ff_");
  }
  norm("dec.final");
  add_param("head.w_m", d, ff, fan(d), 0, rng);
  add_param("head.b_m", 1, ff, 0, 0, rng);
  add_param("head.w_o", ff, out, 0.1f * fan(ff), 0, rng);
  add_param("head.b_o", 1, out, 0, 0, rng);
  add_param("head.w_r", d, out, 0.1f * fan(d), 0, rng);
  add_param("head.b_r", 1, out, 0, 0, rng);
}

SurrogateForecaster::SurrogateForecaster(const SurrogateForecaster& other)
    : cfg_(other.cfg_), params_(other.params_), index_(other.index_) {}

SurrogateForecaster& SurrogateForecaster::operator=(const SurrogateForecaster& other) {
  cfg_ = other.cfg_;
  params_ = other.params_;
  index_ = other.index_;
  forward_calls_ = 0;
  return *this;
}

SurrogateForecaster::SurrogateForecaster(SurrogateForecaster&& other) noexcept
    : cfg_(std::move(other.cfg_)),
      params_(std::move(other.params_)),
      index_(std::move(other.index_)),
      forward_calls_(other.forward_calls_.load()) {}

SurrogateForecaster& SurrogateForecaster::operator=(SurrogateForecaster&& other) noexcept {
  cfg_ = std::move(other.cfg_);
  params_ = std::move(other.params_);
  index_ = std::move(other.index_);
  forward_calls_ = other.forward_calls_.load();
  return *this;
}

std::size_t SurrogateForecaster::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::logic_error("unknown parameter '" + name + "'");
  return it->second;
}

ResidualEmbedWeights SurrogateForecaster::embed_weights() const {
  auto get = [&](const char* n) -> const Matrix& { return params_[index_of(n)].value; };
  ResidualEmbedWeights w;
  w.hidden_w = get("embed.w_m").transpose();
  w.hidden_b = get("embed.b_m").row(0).transpose();
  w.out_w = get("embed.w_o").transpose();
  w.out_b = get("embed.b_o").row(0).transpose();
  w.skip_w = get("embed.w_r").transpose();
  w.skip_b = get("embed.b_r").row(0).transpose();
  w.ln_gain = get("embed.ln_g").row(0).transpose();
  w.ln_bias = get("embed.ln_b").row(0).transpose();
  return w;
}

SurrogateForecaster::Graph SurrogateForecaster::run(
    Tape& tape, const WeightLookup& W, const Eigen::MatrixXf& ctx,
    const Eigen::MatrixXf* decoder_inputs, std::span<const ErasureRecord> erasers,
    std::mt19937_64* rng) const {
  const int batch = static_cast<int>(ctx.rows());
  const int np = cfg_.num_patches();
  const int P = cfg_.patch;
  const int heads = cfg_.n_heads;
  const int tokens = cfg_.decoder_tokens;
  const float drop = rng != nullptr ? static_cast<float>(cfg_.dropout) : 0.0f;
  if (ctx.cols() != cfg_.context)
    throw DimensionError("context length " + std::to_string(ctx.cols()) + " != " +
                         std::to_string(cfg_.context));

  std::array<const ErasureRecord*, kNumTaps> by_tap{};
  for (const auto& e : erasers) {
    const std::size_t t = tap_index(e.layer_tap);
    if (by_tap[t] != nullptr) throw DimensionError("duplicate eraser for tap '" + e.layer_tap + "'");
    e.check_dim(d_model());
    by_tap[t] = &e;
  }
  auto erase = [&](Var h, std::size_t tap) {
    const ErasureRecord* e = by_tap[tap];
    if (e == nullptr) return h;
    // Row form of P h + b.
    return tape.affine(h, e->P.transpose().cast<float>(), e->b.transpose().cast<float>());
  };
  auto dropout = [&](Var v) { return drop > 0.0f ? tape.dropout(v, drop, *rng) : v; };
  auto linear = [&](Var x, const std::string& w, const std::string& b) {
    return tape.add_row(tape.matmul(x, W(w)), W(b));
  };
  auto norm = [&](Var x, const std::string& prefix) {
    return tape.layer_norm(x, W(prefix + "_g"), W(prefix + "_b"));
  };
  auto attend = [&](Var xq, Var xkv, const std::string& prefix, bool causal) {
    Var q = tape.matmul(xq, W(prefix + "wq"));
    Var k = tape.matmul(xkv, W(prefix + "wk"));
    Var v = tape.matmul(xkv, W(prefix + "wv"));
    return tape.matmul(tape.attention(q, k, v, batch, heads, causal), W(prefix + "wo"));
  };
  auto feed_forward = [&](Var x, const std::string& prefix) {
    return linear(tape.relu(linear(x, prefix + "w1", prefix + "b1")), prefix + "w2",
                  prefix + "b2");
  };

  // Patch embedding: rows are (window, patch) pairs.
  Matrix patches(static_cast<Eigen::Index>(batch) * np, P);
  for (int b = 0; b < batch; ++b)
    for (int j = 0; j < np; ++j)
      patches.row(static_cast<Eigen::Index>(b) * np + j) = ctx.block(b, j * P, 1, P);
  Var x = tape.constant(std::move(patches));
  Var hidden = tape.sigmoid(linear(x, "embed.w_m", "embed.b_m"));
  Var o = dropout(linear(hidden, "embed.w_o", "embed.b_o"));
  Var r = linear(x, "embed.w_r", "embed.b_r");
  Var enc = tape.layer_norm(tape.add(o, r), W("embed.ln_g"), W("embed.ln_b"));
  enc = tape.add_tiled(enc, W("enc.pos"));

  for (int i = 0; i < cfg_.n_enc; ++i) {
    const std::string p = "enc" + std::to_string(i) + ".";
    Var h = norm(enc, p + "ln1");
    enc = tape.add(enc, dropout(attend(h, h, p + "sa_", false)));
    enc = tape.add(enc, dropout(feed_forward(norm(enc, p + "ln2"), p + "ff_")));
  }
  enc = norm(enc, "enc.final");

  Var dec;
  if (decoder_inputs != nullptr) {
    if (decoder_inputs->rows() != static_cast<Eigen::Index>(batch) * tokens ||
        decoder_inputs->cols() != cfg_.d_model)
      throw DimensionError("decoder inputs must be (batch * decoder_tokens) x d_model");
    dec = tape.constant(*decoder_inputs);
  } else {
    dec = tape.add_tiled(
        tape.constant(Matrix::Zero(static_cast<Eigen::Index>(batch) * tokens, cfg_.d_model)),
        W("dec.start"));
  }

  Graph g;
  for (int i = 0; i < cfg_.n_dec; ++i) {
    const std::string p = "dec" + std::to_string(i) + ".";
    Var h = norm(dec, p + "ln1");
    dec = tape.add(dec, dropout(attend(h, h, p + "sa_", true)));
    dec = tape.add(dec, dropout(attend(norm(dec, p + "ln2"), enc, p + "ca_", false)));
    dec = tape.add(dec, dropout(feed_forward(norm(dec, p + "ln3"), p + "ff_")));
    dec = erase(dec, static_cast<std::size_t>(i));
    g.taps[static_cast<std::size_t>(i)] = dec;
  }
  Var last = erase(norm(dec, "dec.final"), 4);
  g.taps[4] = last;
  if (tokens > 1) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) rows[static_cast<std::size_t>(b)] = static_cast<Eigen::Index>(b) * tokens + tokens - 1;
    last = tape.take_rows(last, std::move(rows));
  }
  Var head_hidden = tape.sigmoid(linear(last, "head.w_m", "head.b_m"));
  Var head = tape.add(dropout(linear(head_hidden, "head.w_o", "head.b_o")),
                      linear(last, "head.w_r", "head.b_r"));
  g.output = head;
  return g;
}

Var SurrogateForecaster::build_graph(Tape& tape, const Eigen::MatrixXf& normalized_contexts,
                                     std::mt19937_64* dropout_rng) {
  WeightLookup lookup = [&](const std::string& n) { return tape.param(params_[index_of(n)]); };
  return run(tape, lookup, normalized_contexts, nullptr, {}, dropout_rng).output;
}

ForwardResult SurrogateForecaster::finish(const Eigen::MatrixXd& contexts,
                                          const Eigen::MatrixXf* decoder_inputs,
                                          std::span<const ErasureRecord> erasers) const {
  if (contexts.cols() != cfg_.context)
    throw DimensionError("context length " + std::to_string(contexts.cols()) +
                         " != " + std::to_string(cfg_.context));
  const Eigen::Index n = contexts.rows();
  const Eigen::Index tokens = cfg_.decoder_tokens;
  const auto nq = static_cast<Eigen::Index>(cfg_.quantiles.size());
  ForwardResult res;
  res.forecasts.reserve(static_cast<std::size_t>(n));
  res.mean.resize(static_cast<std::size_t>(n));
  res.scale.resize(static_cast<std::size_t>(n));
  for (auto& t : res.taps) t.resize(n * tokens, cfg_.d_model);

  for (Eigen::Index start = 0; start < n; start += kInferenceChunk) {
    const Eigen::Index rows = std::min(kInferenceChunk, n - start);
    Eigen::MatrixXf normalized(rows, cfg_.context);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::VectorXd row = contexts.row(start + i).transpose();
      const auto norm = instance_normalize(std::span<const double>(row.data(), row.size()),
                                           cfg_.epsilon);
      res.mean[static_cast<std::size_t>(start + i)] = norm.mean;
      res.scale[static_cast<std::size_t>(start + i)] = std::max(norm.std, cfg_.epsilon);
      for (Eigen::Index t = 0; t < cfg_.context; ++t)
        normalized(i, t) = static_cast<float>(norm.values[static_cast<std::size_t>(t)]);
    }
    Eigen::MatrixXf chunk_dec;
    if (decoder_inputs != nullptr) chunk_dec = decoder_inputs->middleRows(start * tokens, rows * tokens);

    Tape tape(false);
    WeightLookup lookup = [&](const std::string& name) {
      return tape.constant(params_[index_of(name)].value);
    };
    const Graph g = run(tape, lookup, normalized, decoder_inputs ? &chunk_dec : nullptr,
                        erasers, nullptr);
    for (std::size_t t = 0; t < kNumTaps; ++t)
      res.taps[t].middleRows(start * tokens, rows * tokens) = tape.value(g.taps[t]);
    const Matrix& out = tape.value(g.output);
    for (Eigen::Index i = 0; i < rows; ++i) {
      Eigen::MatrixXd f(cfg_.horizon, nq);
      const double mu = res.mean[static_cast<std::size_t>(start + i)];
      const double sc = res.scale[static_cast<std::size_t>(start + i)];
      for (Eigen::Index h = 0; h < cfg_.horizon; ++h) {
        for (Eigen::Index q = 0; q < nq; ++q) f(h, q) = out(i, h * nq + q);
        std::sort(f.row(h).begin(), f.row(h).end());
      }
      f = (f.array() * sc + mu).matrix();
      res.forecasts.push_back(std::move(f));
    }
  }
  return res;
}

ForwardResult SurrogateForecaster::forward(const Eigen::MatrixXd& contexts,
                                           std::span<const ErasureRecord> erasers) const {
  return finish(contexts, nullptr, erasers);
}

ForwardResult SurrogateForecaster::forward_with_decoder_inputs(
    const Eigen::MatrixXd& contexts, const Eigen::MatrixXf& decoder_inputs,
    std::span<const ErasureRecord> erasers) const {
  if (decoder_inputs.rows() != contexts.rows() * cfg_.decoder_tokens ||
      decoder_inputs.cols() != cfg_.d_model)
    throw DimensionError("decoder inputs must be (batch * decoder_tokens) x d_model");
  return finish(contexts, &decoder_inputs, erasers);
}

namespace {

Eigen::MatrixXd pool(const Eigen::MatrixXf& states, Eigen::Index tokens, TapPooling how) {
  const Eigen::Index n = states.rows() / tokens;
  Eigen::MatrixXd out(n, states.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (how == TapPooling::Final)
      out.row(i) = states.row(i * tokens + tokens - 1).cast<double>();
    else
      out.row(i) = states.middleRows(i * tokens, tokens).cast<double>().colwise().mean();
  }
  return out;
}

}  // namespace

Eigen::MatrixXd SurrogateForecaster::tap_features(const Eigen::MatrixXd& contexts,
                                                  std::size_t tap,
                                                  std::span<const ErasureRecord> erasers) const {
  if (tap >= kNumTaps) throw DimensionError("tap index out of range");
  return pool(forward(contexts, erasers).taps[tap], cfg_.decoder_tokens, cfg_.pooling);
}

std::array<Eigen::MatrixXd, kNumTaps> SurrogateForecaster::all_tap_features(
    const Eigen::MatrixXd& contexts, std::span<const ErasureRecord> erasers) const {
  const ForwardResult res = forward(contexts, erasers);
  std::array<Eigen::MatrixXd, kNumTaps> out;
  for (std::size_t t = 0; t < kNumTaps; ++t)
    out[t] = pool(res.taps[t], cfg_.decoder_tokens, cfg_.pooling);
  return out;
}

Eigen::MatrixXd SurrogateForecaster::generate(const Eigen::MatrixXd& contexts, int total,
                                              std::span<const ErasureRecord> erasers) const {
  if (total <= 0 || total % cfg_.horizon != 0)
    throw DomainError("generation length must be a positive multiple of the horizon");
  const Eigen::Index n = contexts.rows();
  const Eigen::Index T = cfg_.context;
  const Eigen::Index O = cfg_.horizon;
  const auto median = static_cast<Eigen::Index>(cfg_.median_index());
  Eigen::MatrixXd window = contexts;
  Eigen::MatrixXd out(n, total);
  for (int step = 0; step < total / cfg_.horizon; ++step) {
    const ForwardResult res = forward(window, erasers);
    ++forward_calls_;
    Eigen::MatrixXd next(n, T);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd med = res.forecasts[static_cast<std::size_t>(i)].col(median);
      out.block(i, step * O, 1, O) = med.transpose();
      next.block(i, 0, 1, T - O) = window.block(i, O, 1, T - O);
      next.block(i, T - O, 1, O) = med.transpose();
    }
    window = std::move(next);
  }
  return out;
}

namespace {

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"context", c.context},       {"patch", c.patch},
          {"stride", c.stride},         {"d_model", c.d_model},
          {"d_ff", c.d_ff},             {"n_enc", c.n_enc},
          {"n_dec", c.n_dec},           {"n_heads", c.n_heads},
          {"horizon", c.horizon},       {"decoder_tokens", c.decoder_tokens},
          {"quantiles", c.quantiles},   {"dropout", c.dropout},
          {"epsilon", c.epsilon},       {"pooling", c.pooling == TapPooling::Final ? "final" : "mean"},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.context = j.at("context");
  c.patch = j.at("patch");
  c.stride = j.at("stride");
  c.d_model = j.at("d_model");
  c.d_ff = j.at("d_ff");
  c.n_enc = j.at("n_enc");
  c.n_dec = j.at("n_dec");
  c.n_heads = j.at("n_heads");
  c.horizon = j.at("horizon");
  c.decoder_tokens = j.at("decoder_tokens");
  c.quantiles = j.at("quantiles").get<std::vector<double>>();
  c.dropout = j.at("dropout");
  c.epsilon = j.at("epsilon");
  c.pooling = j.at("pooling") == "mean" ? TapPooling::Mean : TapPooling::Final;
  c.seed = j.at("seed");
  return c;
}

}  // namespace

void SurrogateForecaster::save(const std::filesystem::path& path) const {
  WeightsFile wf;
  wf.config_json = config_to_json(cfg_).dump();
  for (const auto& p : params_) wf.tensors.push_back({p.name, p.value});
  write_weights(path, wf);
}

SurrogateForecaster SurrogateForecaster::load(const std::filesystem::path& path) {
  const WeightsFile wf = read_weights(path);
  ModelConfig cfg;
  try {
    cfg = config_from_json(nlohmann::json::parse(wf.config_json));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("weights config: ") + e.what());
  }
  SurrogateForecaster model(cfg);
  if (wf.tensors.size() != model.params_.size())
    throw FormatError("weights file has " + std::to_string(wf.tensors.size()) +
                      " tensors, model expects " + std::to_string(model.params_.size()));
  for (const auto& t : wf.tensors) {
    auto it = model.index_.find(t.name);
    if (it == model.index_.end()) throw FormatError("unexpected tensor '" + t.name + "'");
    auto& p = model.params_[it->second];
    if (p.value.rows() != t.value.rows() || p.value.cols() != t.value.cols())
      throw DimensionError("tensor '" + t.name + "' has the wrong shape");
    p.value = t.value;
  }
  return model;
}

}  // namespace freqprobe
