#include "freqprobe/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "freqprobe/errors.hpp"

namespace freqprobe {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw MissingInputError(what + " not found: " + p.string());
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingInputError("cannot read " + path.string());
  return json::parse(in);
}

void write_resolved_config(const ExperimentConfig& cfg) {
  write_json(PipelinePaths{cfg.output_dir}.config(), config_to_json(cfg));
}

std::vector<BandTask> selected_tasks(const ExperimentConfig& cfg) {
  const auto all = build_task_hierarchy(cfg.signal.f_min, cfg.signal.f_max);
  std::vector<BandTask> out;
  for (const auto& name : cfg.tasks) out.push_back(find_task(all, name));
  return out;
}

DatasetSplit to_split(const WindowDataset& ds) {
  DatasetSplit out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    TimeSeriesWindow w;
    w.samples = ds.samples[i];
    w.frequency = ds.frequencies[i];
    w.phase = ds.phases[i];
    w.source_offset = ds.offsets[i];
    LabeledWindows& dst = ds.split[i] == 0 ? out.train : ds.split[i] == 1 ? out.validation : out.test;
    dst.windows.push_back(std::move(w));
    dst.labels.push_back(ds.labels[i]);
  }
  return out;
}

Eigen::MatrixXd contexts_of(const WindowDataset& ds, std::size_t start, std::size_t stop) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(stop - start), static_cast<Eigen::Index>(ds.window));
  for (std::size_t i = start; i < stop; ++i)
    for (std::size_t t = 0; t < ds.window; ++t)
      out(static_cast<Eigen::Index>(i - start), static_cast<Eigen::Index>(t)) = ds.samples[i][t];
  return out;
}

SurrogateForecaster load_model(const ExperimentConfig& cfg) {
  const PipelinePaths paths{cfg.output_dir};
  require_file(paths.weights(), "surrogate weights (run `train` first)");
  return SurrogateForecaster::load(paths.weights());
}

json io_json(const std::vector<IoPoint>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back({{"f", p.f}, {"mean", p.mean}, {"std", p.std}});
  return a;
}

}  // namespace

fs::path activation_path(const fs::path& dir, const std::string& task, const std::string& tap) {
  return dir / task / (tap + ".fqpb");
}

std::vector<int> aliasing_harmonics(int fs, int patch, int f_min, int f_max) {
  std::vector<int> out;
  if (patch <= 0 || fs % patch != 0) return out;
  const int step = fs / patch;
  for (int f = step; f <= f_max; f += step)
    if (f >= f_min) out.push_back(f);
  return out;
}

std::map<std::string, std::size_t> cmd_gen(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  write_resolved_config(cfg);
  const PipelinePaths paths{cfg.output_dir};
  std::map<std::string, std::size_t> counts;
  const auto tasks = selected_tasks(cfg);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const BandTask& task = tasks[i];
    const DatasetSplit split = build_probe_dataset(cfg.signal, task, SplitRatios{}, cfg.signal.seed + i);
    std::size_t expected = 0;
    for (int f = task.lo; f <= task.hi; ++f)
      expected += static_cast<std::size_t>(count_phase_shifts(f, cfg.signal.fs, cfg.signal.cap));
    write_dataset(paths.probe_dataset(task.name), WindowDataset::from_split(split));
    counts[task.name] = split.size();
    std::ostringstream msg;
    msg << "task " << task.name << " [" << task.lo << ", " << task.hi << "]: " << split.size()
        << " windows (sum of S_f = " << expected << "; train " << split.train.size() << ", val "
        << split.validation.size() << ", test " << split.test.size() << ")";
    say(log, msg.str());
  }
  const DatasetSplit erasure =
      build_erasure_dataset(cfg.signal, cfg.erasure.n_phases, cfg.signal.seed + 100,
                            cfg.erasure.train_fraction, cfg.erasure.frequency_step);
  write_dataset(paths.erasure_dataset(), WindowDataset::from_split(erasure));
  counts["erasure"] = erasure.size();
  say(log, "erasure dataset: " + std::to_string(erasure.size()) + " windows (train " +
               std::to_string(erasure.train.size()) + ", test " + std::to_string(erasure.test.size()) + ")");
  return counts;
}

TrainReport cmd_train(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  write_resolved_config(cfg);
  const PipelinePaths paths{cfg.output_dir};
  const Eigen::MatrixXd corpus =
      make_training_corpus(cfg.signal, cfg.model.context, cfg.model.horizon,
                           cfg.training.corpus_size, cfg.seed + 200);
  SurrogateForecaster model(cfg.model);
  say(log, "training on " + std::to_string(corpus.rows()) + " windows");
  const TrainReport rep = train_quantile(model, corpus, cfg.training.train, [&](int epoch, double loss) {
    std::ostringstream msg;
    msg << "epoch " << epoch << " pinball loss " << loss;
    say(log, msg.str());
  });
  fs::create_directories(paths.weights().parent_path());
  model.save(paths.weights());
  std::ofstream csv(paths.train_log());
  csv << "epoch,loss\n";
  for (std::size_t e = 0; e < rep.epoch_loss.size(); ++e) csv << e << ',' << rep.epoch_loss[e] << '\n';
  return rep;
}

void cmd_tap(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  write_resolved_config(cfg);
  const PipelinePaths paths{cfg.output_dir};
  const SurrogateForecaster model = load_model(cfg);
  for (const auto& task : cfg.tasks) {
    require_file(paths.probe_dataset(task), "probe dataset for task " + task + " (run `gen` first)");
    const WindowDataset ds = read_dataset(paths.probe_dataset(task));
    if (ds.window != static_cast<std::size_t>(model.config().context))
      throw DimensionError("dataset window length differs from the model context");
    const auto n = static_cast<Eigen::Index>(ds.size());
    std::array<FeatureMatrix, kNumTaps> feats;
    for (auto& f : feats) f.resize(n, model.config().d_model);
    const std::size_t chunk = 2048;
    for (std::size_t start = 0; start < ds.size(); start += chunk) {
      const std::size_t stop = std::min(ds.size(), start + chunk);
      const auto all = model.all_tap_features(contexts_of(ds, start, stop));
      for (std::size_t t = 0; t < kNumTaps; ++t)
        feats[t].middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(stop - start)) =
            all[t].cast<float>();
    }
    for (const auto& tap : cfg.taps) {
      ActivationSet set;
      set.tap_id = tap;
      set.features = feats[tap_index(tap)];
      set.labels = ds.labels;
      set.frequencies = ds.frequencies;
      write_activations(activation_path(paths.activations_dir(), task, tap), set);
    }
    say(log, "task " + task + ": activations for " + std::to_string(ds.size()) + " windows");
  }
}

ProbeRun cmd_probe(const ExperimentConfig& cfg, const std::optional<fs::path>& activations_dir,
                   const Logger& log) {
  cfg.validate();
  write_resolved_config(cfg);
  const PipelinePaths paths{cfg.output_dir};
  const fs::path dir = activations_dir.value_or(paths.activations_dir());
  const auto tasks = selected_tasks(cfg);

  for (const auto& task : tasks)
    for (const auto& tap : cfg.taps)
      if (!fs::exists(activation_path(dir, task.name, tap)))
        throw MissingInputError("activation file for tap " + tap + " (task " + task.name +
                                ") not found: " + activation_path(dir, task.name, tap).string());

  // Split assignments from the probe datasets, when present.
  std::vector<std::optional<std::vector<std::uint8_t>>> splits(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (fs::exists(paths.probe_dataset(tasks[i].name)))
      splits[i] = read_dataset(paths.probe_dataset(tasks[i].name)).split;

  const std::size_t jobs = tasks.size() * cfg.taps.size();
  ProbeRun run;
  run.truth.resize(jobs);
  run.control.resize(jobs);
  parallel_for(jobs, worker_count(), [&](std::size_t j) {
    const std::size_t ti = j / cfg.taps.size();
    const std::string& tap = cfg.taps[j % cfg.taps.size()];
    const ActivationSet set = read_activations(activation_path(dir, tasks[ti].name, tap));
    const std::vector<std::uint8_t>* split =
        splits[ti] && splits[ti]->size() == set.rows() ? &*splits[ti] : nullptr;
    ProbeConfig pc = cfg.probe;
    pc.seed = cfg.probe.seed + j;
    run.truth[j] = run_probe(set, tasks[ti], pc, false, split);
    run.control[j] = run_probe(set, tasks[ti], pc, true, split);
  });
  for (std::size_t j = 0; j < jobs; ++j) {
    std::ostringstream msg;
    msg.precision(4);
    msg << run.truth[j].task << " @ " << run.truth[j].tap << ": sv " << run.truth[j].space_saving
        << " control " << run.control[j].space_saving << " acc " << run.truth[j].accuracy;
    say(log, msg.str());
  }

  write_sv_csv(paths.reports() / "sv_by_layer_task.csv", run.truth, run.control);
  write_accuracy_csv(paths.reports() / "accuracy_by_frequency.csv", run.truth,
                     build_task_hierarchy(cfg.signal.f_min, cfg.signal.f_max), cfg.signal.f_min,
                     cfg.signal.f_max);
  const auto harmonics =
      aliasing_harmonics(cfg.signal.fs, cfg.model.patch, cfg.signal.f_min, cfg.signal.f_max);
  write_json(paths.reports() / "probe_reports.json", probe_rows_json(run, harmonics, 0.6));
  return run;
}

json probe_rows_json(const ProbeRun& run, const std::vector<int>& harmonics, double dip_threshold) {
  json rows = json::array();
  for (std::size_t j = 0; j < run.truth.size(); ++j) {
    const ProbeReport& r = run.truth[j];
    json per_f = json::object();
    for (const auto& [f, acc] : r.per_frequency_accuracy) per_f[std::to_string(f)] = acc;
    const auto dips = degradation_gap(r, dip_threshold);
    std::vector<int> at_harmonics;
    for (int f : dips)
      if (std::binary_search(harmonics.begin(), harmonics.end(), f)) at_harmonics.push_back(f);
    json row = {{"task", r.task},
                {"layer", r.tap},
                {"sv", r.space_saving},
                {"sv_control", j < run.control.size() ? json(run.control[j].space_saving) : json()},
                {"accuracy", r.accuracy},
                {"codelength", r.codelength_total},
                {"codelength_uniform", r.codelength_uniform},
                {"stream_samples", r.stream_samples},
                {"test_samples", r.test_samples},
                {"per_frequency_accuracy", per_f},
                {"dips", dips},
                {"harmonic_dips", at_harmonics}};
    rows.push_back(std::move(row));
  }
  return {{"dip_threshold", dip_threshold}, {"rows", rows}};
}

std::vector<ErasureRow> cmd_erase(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  write_resolved_config(cfg);
  const PipelinePaths paths{cfg.output_dir};
  const SurrogateForecaster model = load_model(cfg);
  require_file(paths.erasure_dataset(), "erasure dataset (run `gen` first)");
  const DatasetSplit data = to_split(read_dataset(paths.erasure_dataset()));
  const auto all = build_task_hierarchy(cfg.signal.f_min, cfg.signal.f_max);
  const BandTask& task = find_task(all, cfg.erasure.task);

  const std::vector<ErasureRow> rows =
      erasure_experiment(model, data, task, cfg.erasure.tap_subsets, cfg.erasure.options);
  write_erasure_csv(paths.reports() / "erasure_rmse.csv", rows);

  json table = json::array();
  for (const auto& row : rows) {
    std::ostringstream msg;
    msg.precision(5);
    msg << "subset " << row.subset << ": rmse " << row.rmse;
    if (row.p_value) msg << " p " << *row.p_value << (row.significant ? " *" : "");
    say(log, msg.str());
    for (const auto& e : row.erasers)
      write_eraser(paths.erasers_dir() / row.subset / (e.tap + ".fqer"), e.to_record());
    table.push_back({{"subset", row.subset},
                     {"rmse", row.rmse},
                     {"p_value", row.p_value ? json(*row.p_value) : json()},
                     {"significant", row.p_value ? json(row.significant) : json()},
                     {"n", row.squared_errors.size()}});
  }

  std::vector<int> freqs;
  for (int f = cfg.signal.f_min; f <= cfg.signal.f_max; f += cfg.io_curve.f_step) freqs.push_back(f);
  const int length = cfg.erasure.options.generate_length;
  const auto baseline = input_output_curve(
      [&](const Eigen::MatrixXd& ctx) { return model.generate(ctx, length, {}); }, freqs,
      cfg.io_curve.n_windows, cfg.signal.fs, cfg.model.context, cfg.seed + 300);
  write_io_csv(paths.reports() / "io_curve.csv", baseline);
  json erased_json = nullptr;
  const ErasureRow* widest = nullptr;
  for (const auto& row : rows)
    if (!row.erasers.empty() && (widest == nullptr || row.erasers.size() > widest->erasers.size()))
      widest = &row;
  if (widest != nullptr) {
    const auto records = to_records(widest->erasers);
    const auto erased = input_output_curve(
        [&](const Eigen::MatrixXd& ctx) { return model.generate(ctx, length, records); }, freqs,
        cfg.io_curve.n_windows, cfg.signal.fs, cfg.model.context, cfg.seed + 300);
    write_io_csv(paths.reports() / ("io_curve_erased_" + widest->subset + ".csv"), erased);
    erased_json = {{"subset", widest->subset}, {"points", io_json(erased)}};
  }
  write_json(paths.reports() / "erasure.json",
             {{"task", task.name},
              {"rows", table},
              {"io_curve", {{"baseline", io_json(baseline)}, {"erased", erased_json}}}});
  return rows;
}

json cmd_report(const ExperimentConfig& cfg, const Logger& log) {
  cfg.validate();
  const PipelinePaths paths{cfg.output_dir};
  json warnings = json::array();
  json summary;
  summary["schema_version"] = 1;
  summary["config"] = config_to_json(cfg);
  summary["aliasing_harmonics"] =
      aliasing_harmonics(cfg.signal.fs, cfg.model.patch, cfg.signal.f_min, cfg.signal.f_max);

  const fs::path probe_file = paths.reports() / "probe_reports.json";
  if (fs::exists(probe_file)) {
    summary["probe"] = read_json(probe_file);
  } else {
    summary["probe"] = nullptr;
    warnings.push_back("probe stage missing: " + probe_file.string() + " not found");
  }
  const fs::path erase_file = paths.reports() / "erasure.json";
  if (fs::exists(erase_file)) {
    summary["erasure"] = read_json(erase_file);
  } else {
    summary["erasure"] = nullptr;
    warnings.push_back("erasure stage missing: " + erase_file.string() + " not found");
  }
  const fs::path log_file = paths.train_log();
  if (fs::exists(log_file)) {
    json losses = json::array();
    std::ifstream in(log_file);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma != std::string::npos) losses.push_back(std::stod(line.substr(comma + 1)));
    }
    summary["training"] = {{"epoch_loss", losses}};
  } else {
    summary["training"] = nullptr;
    warnings.push_back("training log missing: " + log_file.string() + " not found");
  }
  summary["warnings"] = warnings;
  for (const auto& w : warnings) say(log, "warning: " + w.get<std::string>());

  write_json(paths.reports() / "summary.json", summary);
  std::ofstream schema(paths.reports() / "summary.schema.json");
  schema << summary_schema();
  return summary;
}

}  // namespace freqprobe
