#include "freqprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "freqprobe/errors.hpp"

namespace freqprobe {

namespace {

void require_range(const char* name, double v, double lo, double hi) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream msg;
    msg << "probe " << name << " = " << v << " outside [" << lo << ", " << hi << "]";
    throw DomainError(msg.str());
  }
}

// Fixed-capacity uniform sample of everything pushed so far (algorithm R).
class Reservoir {
 public:
  Reservoir(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {}

  void push(const Eigen::MatrixXd& x, const std::vector<int>& y) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      ++seen_;
      if (rows_.size() < capacity_) {
        rows_.emplace_back(x.row(i));
        labels_.push_back(y[static_cast<std::size_t>(i)]);
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, seen_ - 1);
      const std::size_t j = pick(rng_);
      if (j < capacity_) {
        rows_[j] = x.row(i);
        labels_[j] = y[static_cast<std::size_t>(i)];
      }
    }
  }

  bool empty() const { return rows_.empty(); }

  void draw(std::size_t count, std::vector<Eigen::RowVectorXd>& xs, std::vector<int>& ys) {
    if (rows_.empty()) return;
    std::uniform_int_distribution<std::size_t> pick(0, rows_.size() - 1);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t j = pick(rng_);
      xs.push_back(rows_[j]);
      ys.push_back(labels_[j]);
    }
  }

 private:
  std::size_t capacity_;
  std::mt19937_64 rng_;
  std::size_t seen_ = 0;
  std::vector<Eigen::RowVectorXd> rows_;
  std::vector<int> labels_;
};

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

}  // namespace

void ProbeConfig::validate() const {
  if (replay_streams < 1 || replay_streams > 5)
    throw DomainError("probe replay_streams must lie in [1, 5]");
  require_range("ema_decay", ema_decay, 0.005, 0.1);
  require_range("reset_prob", reset_prob, 0.01, 0.2);
  require_range("noise_level", noise_level, 0.01, 0.1);
  require_range("dropout", dropout, 0.1, 0.3);
  if (batch_size != 64 && batch_size != 128 && batch_size != 256)
    throw DomainError("probe batch_size must be 64, 128 or 256");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw DomainError("probe lr must be positive");
  if (!(weight_decay > 0.0) || !std::isfinite(weight_decay))
    throw DomainError("probe weight_decay must be positive");
  if (steps_per_batch < 1) throw DomainError("probe steps_per_batch must be >= 1");
  if (replay_capacity < 1) throw DomainError("probe replay_capacity must be >= 1");
}

LinearProbe::LinearProbe(std::size_t classes, std::size_t dim)
    : weight(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes),
                                   static_cast<Eigen::Index>(dim))),
      bias(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(classes))) {}

Eigen::MatrixXd LinearProbe::log_probs(const Eigen::MatrixXd& x) const {
  if (x.cols() != weight.cols()) throw DimensionError("probe input width disagrees");
  Eigen::MatrixXd logits = x * weight.transpose();
  logits.rowwise() += bias.transpose();
  const Eigen::VectorXd mx = logits.rowwise().maxCoeff();
  logits.colwise() -= mx;
  const Eigen::VectorXd lse = logits.array().exp().rowwise().sum().log().matrix();
  logits.colwise() -= lse;
  return logits;
}

std::vector<int> LinearProbe::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd lp = log_probs(x);
  std::vector<int> out(static_cast<std::size_t>(lp.rows()));
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    Eigen::Index arg = 0;
    lp.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

double codelength_bits(const LinearProbe& probe, const Eigen::MatrixXd& x,
                       const std::vector<int>& y) {
  if (static_cast<std::size_t>(x.rows()) != y.size())
    throw DimensionError("codelength: feature and label counts differ");
  const Eigen::MatrixXd lp = probe.log_probs(x);
  // Converted per sample so that a uniform predictor costs exactly log2(c) each.
  double bits = 0.0;
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    if (c < 0 || static_cast<std::size_t>(c) >= probe.classes())
      throw DomainError("codelength: label outside the class set");
    bits -= lp(i, c) / std::numbers::ln2;
  }
  return bits;
}

void PrequentialAudit::operator()(ProbeEvent e, std::size_t batch) {
  ++events_;
  if (batch >= state_.size()) state_.resize(batch + 1, 0);
  auto& s = state_[batch];
  if (e == ProbeEvent::Evaluate) {
    if (s != 0) ++violations_;
    s = 1;
  } else {
    if (s == 0) ++violations_;
    s = 2;
  }
}

PrequentialResult prequential_fit(const std::vector<ProbeBatch>& batches, std::size_t classes,
                                  const ProbeConfig& cfg,
                                  const std::function<void(ProbeEvent, std::size_t)>& observer) {
  cfg.validate();
  if (batches.empty()) throw DomainError("prequential_fit: no batches");
  if (classes < 2) throw DomainError("prequential_fit: need at least two classes");
  const Eigen::Index d = batches.front().x.cols();
  for (const auto& b : batches) {
    if (b.x.rows() == 0 || static_cast<std::size_t>(b.x.rows()) != b.y.size())
      throw DomainError("prequential_fit: empty or inconsistent batch");
    if (b.x.cols() != d) throw DimensionError("prequential_fit: batch widths differ");
    for (int y : b.y)
      if (y < 0 || static_cast<std::size_t>(y) >= classes)
        throw DomainError("prequential_fit: label outside the class set");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<Reservoir> streams;
  for (int s = 0; s < cfg.replay_streams; ++s) streams.emplace_back(cfg.replay_capacity, rng());

  PrequentialResult res;
  res.probe = LinearProbe(classes, static_cast<std::size_t>(d));
  LinearProbe ema = res.probe;
  const auto c = static_cast<Eigen::Index>(classes);
  Eigen::MatrixXd mw = Eigen::MatrixXd::Zero(c, d), vw = mw;
  Eigen::VectorXd mb = Eigen::VectorXd::Zero(c), vb = mb;
  long step = 0;
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  for (std::size_t k = 0; k < batches.size(); ++k) {
    const auto& batch = batches[k];
    if (observer) observer(ProbeEvent::Evaluate, k);
    const double bits = codelength_bits(res.probe, batch.x, batch.y);
    if (!std::isfinite(bits)) throw NumericalError("prequential_fit: non-finite codelength");
    res.batch_bits.push_back(bits);
    res.codelength += bits;
    res.samples += batch.y.size();

    if (observer) observer(ProbeEvent::Update, k);
    const double rms = std::sqrt(batch.x.squaredNorm() / static_cast<double>(batch.x.size()));
    const double sigma = cfg.noise_level * (rms > 0.0 ? rms : 1.0);
    // Adam moves each weight by about lr, so a logit moves by about lr * |h|_1.
    const double l1 = batch.x.cwiseAbs().rowwise().sum().mean();
    const double lr = cfg.lr / std::max(l1, 1e-12);
    for (int s = 0; s < cfg.steps_per_batch; ++s) {
      std::vector<Eigen::RowVectorXd> xs;
      std::vector<int> ys;
      for (Eigen::Index i = 0; i < batch.x.rows(); ++i) {
        xs.emplace_back(batch.x.row(i));
        ys.push_back(batch.y[static_cast<std::size_t>(i)]);
      }
      const std::size_t share =
          static_cast<std::size_t>(cfg.batch_size) / static_cast<std::size_t>(cfg.replay_streams);
      for (auto& stream : streams) stream.draw(share, xs, ys);

      const auto n = static_cast<Eigen::Index>(xs.size());
      Eigen::MatrixXd x(n, d);
      const double keep = 1.0 - cfg.dropout;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          double v = xs[static_cast<std::size_t>(i)](j) + sigma * gauss(rng);
          x(i, j) = unit(rng) < keep ? v / keep : 0.0;
        }
      }
      Eigen::MatrixXd logits = x * res.probe.weight.transpose();
      logits.rowwise() += res.probe.bias.transpose();
      Eigen::MatrixXd g = softmax_rows(logits);
      for (Eigen::Index i = 0; i < n; ++i) g(i, ys[static_cast<std::size_t>(i)]) -= 1.0;
      g /= static_cast<double>(n);
      const Eigen::MatrixXd gw = g.transpose() * x;
      const Eigen::VectorXd gb = g.colwise().sum().transpose();
      if (!gw.allFinite() || !gb.allFinite())
        throw NumericalError("prequential_fit: non-finite gradient");

      ++step;
      mw = b1 * mw + (1.0 - b1) * gw;
      vw = b2 * vw + (1.0 - b2) * gw.cwiseProduct(gw);
      mb = b1 * mb + (1.0 - b1) * gb;
      vb = b2 * vb + (1.0 - b2) * gb.cwiseProduct(gb);
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      res.probe.weight *= 1.0 - lr * cfg.weight_decay;
      res.probe.weight.array() -= lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + eps);
      res.probe.bias.array() -= cfg.lr * (mb.array() / c1) / ((vb.array() / c2).sqrt() + eps);
    }

    ema.weight += cfg.ema_decay * (res.probe.weight - ema.weight);
    ema.bias += cfg.ema_decay * (res.probe.bias - ema.bias);
    if (unit(rng) < cfg.reset_prob) {
      // The average starts at the zero probe; divide out that start's weight.
      const double seen = 1.0 - std::pow(1.0 - cfg.ema_decay, static_cast<double>(k + 1));
      res.probe.weight = ema.weight / seen;
      res.probe.bias = ema.bias / seen;
    }
    for (auto& stream : streams) stream.push(batch.x, batch.y);
  }
  return res;
}

double space_saving(double codelength, double uniform_codelength) {
  if (!(uniform_codelength > 0.0)) throw DomainError("space_saving: uniform codelength must be > 0");
  return 1.0 - codelength / uniform_codelength;
}

ProbeReport run_probe(const ActivationSet& set, const std::optional<BandTask>& band,
                      const ProbeConfig& cfg, bool control,
                      const std::vector<std::uint8_t>* split) {
  cfg.validate();
  set.validate();
  if (set.rows() == 0) throw DomainError("empty activation set");
  if (split != nullptr && split->size() != set.rows())
    throw DimensionError("run_probe: split length differs from the activation rows");

  // Rows participating in the task and their labels.
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::map<int, int> class_of;
  if (!band) {
    for (auto f : set.frequencies) class_of.emplace(f, 0);
    int next = 0;
    for (auto& [f, c] : class_of) c = next++;
  }
  for (std::size_t i = 0; i < set.rows(); ++i) {
    const int f = set.frequencies[i];
    if (band) {
      const BandLabel l = label_window(*band, f);
      if (l == BandLabel::Excluded) continue;
      labels.push_back(static_cast<int>(l));
    } else {
      labels.push_back(class_of.at(f));
    }
    rows.push_back(i);
  }
  if (rows.empty()) throw DomainError("run_probe: no rows fall inside the task band");
  const std::size_t classes = band ? 2 : class_of.size();
  if (classes < 2) throw DomainError("run_probe: need at least two classes");

  std::mt19937_64 rng(cfg.seed);
  if (control) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(classes) - 1);
    for (auto& l : labels) l = pick(rng);
  }

  // Partition.
  std::vector<std::uint8_t> part(rows.size(), 0);
  if (split != nullptr) {
    for (std::size_t r = 0; r < rows.size(); ++r) part[r] = (*split)[rows[r]];
  } else {
    std::map<int, std::vector<std::size_t>> by_freq;
    for (std::size_t r = 0; r < rows.size(); ++r) by_freq[set.frequencies[rows[r]]].push_back(r);
    for (auto& [f, members] : by_freq) {
      std::shuffle(members.begin(), members.end(), rng);
      const std::size_t m = members.size();
      std::size_t n_test = static_cast<std::size_t>(std::lround(0.15 * static_cast<double>(m)));
      if (m >= 2) n_test = std::max<std::size_t>(n_test, 1);
      for (std::size_t j = 0; j < n_test; ++j) part[members[j]] = 2;
    }
  }

  std::vector<std::size_t> stream, test;
  for (std::size_t r = 0; r < rows.size(); ++r) (part[r] == 2 ? test : stream).push_back(r);
  if (stream.empty() || test.empty())
    throw DomainError("run_probe: both the stream and the test partition must be non-empty");
  std::shuffle(stream.begin(), stream.end(), rng);

  const Eigen::Index d = set.features.cols();
  const auto row_of = [&](std::size_t r) {
    return set.features.row(static_cast<Eigen::Index>(rows[r])).cast<double>();
  };
  std::vector<ProbeBatch> batches;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (std::size_t start = 0; start < stream.size(); start += bs) {
    const std::size_t stop = std::min(stream.size(), start + bs);
    ProbeBatch b{Eigen::MatrixXd(static_cast<Eigen::Index>(stop - start), d), {}};
    for (std::size_t j = start; j < stop; ++j) {
      b.x.row(static_cast<Eigen::Index>(j - start)) = row_of(stream[j]);
      b.y.push_back(labels[stream[j]]);
    }
    batches.push_back(std::move(b));
  }

  const PrequentialResult fit = prequential_fit(batches, classes, cfg);

  Eigen::MatrixXd tx(static_cast<Eigen::Index>(test.size()), d);
  for (std::size_t j = 0; j < test.size(); ++j) tx.row(static_cast<Eigen::Index>(j)) = row_of(test[j]);
  const std::vector<int> pred = fit.probe.predict(tx);
  std::map<int, std::pair<std::size_t, std::size_t>> tally;
  std::size_t correct = 0;
  for (std::size_t j = 0; j < test.size(); ++j) {
    const bool ok = pred[j] == labels[test[j]];
    correct += ok ? 1 : 0;
    auto& t = tally[set.frequencies[rows[test[j]]]];
    t.first += ok ? 1 : 0;
    ++t.second;
  }

  ProbeReport rep;
  rep.task = band ? band->name : "freq";
  rep.tap = set.tap_id;
  rep.codelength_total = fit.codelength;
  rep.codelength_uniform = static_cast<double>(fit.samples) * std::log2(static_cast<double>(classes));
  rep.space_saving = space_saving(rep.codelength_total, rep.codelength_uniform);
  rep.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  for (const auto& [f, t] : tally)
    rep.per_frequency_accuracy[f] = static_cast<double>(t.first) / static_cast<double>(t.second);
  rep.classes = classes;
  rep.stream_samples = fit.samples;
  rep.test_samples = test.size();
  rep.is_control = control;
  return rep;
}

std::vector<int> degradation_gap(const ProbeReport& report, double threshold) {
  std::vector<int> out;
  for (const auto& [f, acc] : report.per_frequency_accuracy)
    if (acc < threshold) out.push_back(f);
  return out;
}

}  // namespace freqprobe
