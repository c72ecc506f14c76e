#include "freqprobe/config.hpp"

#include <fstream>
#include <set>

#include "freqprobe/errors.hpp"

namespace freqprobe {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), std::string("wrong type (") + it->type_name() + ")");
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    static const json empty = json::object();
    return Section(it == j_.end() ? empty : *it, field(key));
  }

  bool has(const char* key) const { return j_.contains(key); }

  /// Rejects keys that were never requested.
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(field(k.c_str()), "unknown field");
  }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

void ExperimentConfig::apply_seed(std::uint64_t s) {
  seed = s;
  signal.seed = s;
  model.seed = s;
  training.train.seed = s + 1;
  probe.seed = s + 2;
}

void ExperimentConfig::validate() const {
  checked("signal", [&] { signal.validate(); });
  checked("model", [&] { model.validate(); });
  checked("probe", [&] { probe.validate(); });
  if (model.context != signal.window)
    throw ConfigError("model.context", "must equal signal.T");
  if (training.corpus_size == 0) throw ConfigError("training.corpus_size", "must be positive");
  if (training.train.epochs < 0) throw ConfigError("training.epochs", "must be >= 0");
  if (training.train.batch_size < 1) throw ConfigError("training.batch_size", "must be >= 1");
  if (!(training.train.lr > 0.0)) throw ConfigError("training.lr", "must be positive");

  std::vector<BandTask> hierarchy;
  checked("signal", [&] { hierarchy = build_task_hierarchy(signal.f_min, signal.f_max); });
  auto known_task = [&](const std::string& name) {
    for (const auto& t : hierarchy)
      if (t.name == name) return true;
    return false;
  };
  if (tasks.empty()) throw ConfigError("tasks", "at least one task is required");
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (!known_task(tasks[i]))
      throw ConfigError("tasks[" + std::to_string(i) + "]", "unknown task '" + tasks[i] + "'");
  if (taps.empty()) throw ConfigError("taps", "at least one tap is required");
  for (std::size_t i = 0; i < taps.size(); ++i)
    if (!is_tap_id(taps[i]))
      throw ConfigError("taps[" + std::to_string(i) + "]", "unknown tap '" + taps[i] + "'");
  if (!known_task(erasure.task)) throw ConfigError("erasure.task", "unknown task '" + erasure.task + "'");
  if (erasure.n_phases < 1) throw ConfigError("erasure.n_phases", "must be >= 1");
  if (erasure.frequency_step < 1) throw ConfigError("erasure.frequency_step", "must be >= 1");
  if (!(erasure.train_fraction > 0.0 && erasure.train_fraction < 1.0))
    throw ConfigError("erasure.train_fraction", "must lie in (0, 1)");
  if (erasure.options.generate_length <= 0 || erasure.options.generate_length % model.horizon != 0)
    throw ConfigError("erasure.generate_length", "must be a positive multiple of model.horizon");
  if (!(erasure.options.alpha > 0.0 && erasure.options.alpha < 1.0))
    throw ConfigError("erasure.alpha", "must lie in (0, 1)");
  if (io_curve.f_step < 1) throw ConfigError("io_curve.f_step", "must be >= 1");
  if (io_curve.n_windows < 1) throw ConfigError("io_curve.n_windows", "must be >= 1");
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  Section root(j, "");
  std::uint64_t seed = 0;
  root.get("seed", seed);
  cfg.apply_seed(seed);
  std::string out = cfg.output_dir.string();
  root.get("output_dir", out);
  cfg.output_dir = out;

  {
    Section s = root.child("signal");
    s.get("fs", cfg.signal.fs);
    s.get("T", cfg.signal.window);
    s.get("f_min", cfg.signal.f_min);
    s.get("f_max", cfg.signal.f_max);
    s.get("epsilon", cfg.signal.epsilon);
    s.get("cap", cfg.signal.cap);
    s.get("seed", cfg.signal.seed);
    s.finish();
  }
  {
    Section s = root.child("model");
    auto& m = cfg.model;
    s.get("context", m.context);
    s.get("patch", m.patch);
    s.get("stride", m.stride);
    s.get("d_model", m.d_model);
    s.get("d_ff", m.d_ff);
    s.get("n_enc", m.n_enc);
    s.get("n_dec", m.n_dec);
    s.get("n_heads", m.n_heads);
    s.get("horizon", m.horizon);
    s.get("decoder_tokens", m.decoder_tokens);
    s.get("quantiles", m.quantiles);
    s.get("dropout", m.dropout);
    s.get("epsilon", m.epsilon);
    std::string pooling = m.pooling == TapPooling::Mean ? "mean" : "final";
    s.get("pooling", pooling);
    if (pooling == "final")
      m.pooling = TapPooling::Final;
    else if (pooling == "mean")
      m.pooling = TapPooling::Mean;
    else
      throw ConfigError("model.pooling", "expected \"final\" or \"mean\"");
    s.finish();
  }
  {
    Section s = root.child("training");
    auto& t = cfg.training.train;
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    s.get("lr", t.lr);
    s.get("weight_decay", t.weight_decay);
    s.get("grad_clip", t.grad_clip);
    s.get("warmup_steps", t.warmup_steps);
    s.get("corpus_size", cfg.training.corpus_size);
    s.finish();
  }
  {
    Section s = root.child("probe");
    auto& p = cfg.probe;
    s.get("replay_streams", p.replay_streams);
    s.get("ema_decay", p.ema_decay);
    s.get("reset_prob", p.reset_prob);
    s.get("noise_level", p.noise_level);
    s.get("batch_size", p.batch_size);
    s.get("lr", p.lr);
    s.get("weight_decay", p.weight_decay);
    s.get("dropout", p.dropout);
    s.get("steps_per_batch", p.steps_per_batch);
    s.get("replay_capacity", p.replay_capacity);
    s.finish();
  }
  root.get("tasks", cfg.tasks);
  root.get("taps", cfg.taps);
  {
    Section s = root.child("erasure");
    auto& e = cfg.erasure;
    s.get("task", e.task);
    s.get("n_phases", e.n_phases);
    s.get("frequency_step", e.frequency_step);
    s.get("train_fraction", e.train_fraction);
    s.get("generate_length", e.options.generate_length);
    s.get("alpha", e.options.alpha);
    if (s.has("tap_subsets")) {
      std::vector<std::string> labels;
      s.get("tap_subsets", labels);
      e.tap_subsets.clear();
      for (std::size_t i = 0; i < labels.size(); ++i)
        checked("erasure.tap_subsets[" + std::to_string(i) + "]",
                [&] { e.tap_subsets.push_back(parse_subset(labels[i])); });
    }
    s.finish();
  }
  {
    Section s = root.child("io_curve");
    s.get("f_step", cfg.io_curve.f_step);
    s.get("n_windows", cfg.io_curve.n_windows);
    s.finish();
  }
  root.finish();
  cfg.erasure.options.fs = cfg.signal.fs;
  cfg.validate();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  const auto& t = cfg.training.train;
  const auto& p = cfg.probe;
  std::vector<std::string> subsets;
  for (const auto& s : cfg.erasure.tap_subsets) subsets.push_back(subset_label(s));
  return {
      {"seed", cfg.seed},
      {"output_dir", cfg.output_dir.string()},
      {"signal",
       {{"fs", cfg.signal.fs}, {"T", cfg.signal.window}, {"f_min", cfg.signal.f_min},
        {"f_max", cfg.signal.f_max}, {"epsilon", cfg.signal.epsilon}, {"cap", cfg.signal.cap},
        {"seed", cfg.signal.seed}}},
      {"model",
       {{"context", m.context}, {"patch", m.patch}, {"stride", m.stride}, {"d_model", m.d_model},
        {"d_ff", m.d_ff}, {"n_enc", m.n_enc}, {"n_dec", m.n_dec}, {"n_heads", m.n_heads},
        {"horizon", m.horizon}, {"decoder_tokens", m.decoder_tokens},
        {"quantiles", m.quantiles}, {"dropout", m.dropout}, {"epsilon", m.epsilon},
        {"pooling", m.pooling == TapPooling::Mean ? "mean" : "final"}}},
      {"training",
       {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"lr", t.lr},
        {"weight_decay", t.weight_decay}, {"grad_clip", t.grad_clip},
        {"warmup_steps", t.warmup_steps}, {"corpus_size", cfg.training.corpus_size}}},
      {"probe",
       {{"replay_streams", p.replay_streams}, {"ema_decay", p.ema_decay},
        {"reset_prob", p.reset_prob}, {"noise_level", p.noise_level},
        {"batch_size", p.batch_size}, {"lr", p.lr}, {"weight_decay", p.weight_decay},
        {"dropout", p.dropout}, {"steps_per_batch", p.steps_per_batch},
        {"replay_capacity", p.replay_capacity}}},
      {"tasks", cfg.tasks},
      {"taps", cfg.taps},
      {"erasure",
       {{"task", cfg.erasure.task}, {"n_phases", cfg.erasure.n_phases},
        {"frequency_step", cfg.erasure.frequency_step},
        {"train_fraction", cfg.erasure.train_fraction},
        {"generate_length", cfg.erasure.options.generate_length},
        {"alpha", cfg.erasure.options.alpha}, {"tap_subsets", subsets}}},
      {"io_curve", {{"f_step", cfg.io_curve.f_step}, {"n_windows", cfg.io_curve.n_windows}}},
  };
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("config file not found: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace freqprobe
