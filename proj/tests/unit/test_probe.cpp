#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"

#include "freqprobe/errors.hpp"
#include "freqprobe/probe.hpp"
#include "freqprobe/signal.hpp"

using namespace freqprobe;

namespace {

// Features that one-hot encode the binary label of each row under `task`.
ActivationSet label_one_hot(const BandTask& task, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> f(task.lo, task.hi);
  ActivationSet s;
  s.tap_id = "out";
  s.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const int fi = f(rng);
    const int l = static_cast<int>(label_window(task, fi));
    s.features(static_cast<Eigen::Index>(i), l) = 1.0f;
    s.labels.push_back(l);
    s.frequencies.push_back(fi);
  }
  return s;
}

std::vector<ProbeBatch> blobs(std::size_t n, double margin_sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<ProbeBatch> out;
  for (std::size_t start = 0; start < n; start += 128) {
    ProbeBatch b{Eigen::MatrixXd(static_cast<Eigen::Index>(std::min<std::size_t>(128, n - start)), 2), {}};
    for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
      const int y = static_cast<int>(rng() & 1u);
      const double c = (y == 1 ? 1.0 : -1.0) * margin_sigma;
      b.x(i, 0) = c + g(rng);
      b.x(i, 1) = g(rng);
      b.y.push_back(y);
    }
    out.push_back(std::move(b));
  }
  return out;
}

// Full-batch gradient descent logistic regression, the separability oracle.
double batch_logistic_accuracy(const std::vector<ProbeBatch>& batches) {
  Eigen::Vector3d w = Eigen::Vector3d::Zero();
  for (int it = 0; it < 500; ++it) {
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    std::size_t n = 0;
    for (const auto& b : batches)
      for (Eigen::Index i = 0; i < b.x.rows(); ++i) {
        const Eigen::Vector3d x(b.x(i, 0), b.x(i, 1), 1.0);
        const double p = 1.0 / (1.0 + std::exp(-w.dot(x)));
        grad += (p - b.y[static_cast<std::size_t>(i)]) * x;
        ++n;
      }
    w -= 0.5 * grad / static_cast<double>(n);
  }
  std::size_t ok = 0, n = 0;
  for (const auto& b : batches)
    for (Eigen::Index i = 0; i < b.x.rows(); ++i, ++n)
      ok += ((w.dot(Eigen::Vector3d(b.x(i, 0), b.x(i, 1), 1.0)) > 0) == (b.y[static_cast<std::size_t>(i)] == 1));
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

TEST_SUITE("probe") {

TEST_CASE("codelength of fixed predictors") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(37, 5);
  std::vector<int> y(37);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  const LinearProbe uniform(2, 5);
  CHECK(codelength_bits(uniform, x, y) == 37.0);

  // A confident oracle costs (almost) nothing.
  LinearProbe oracle(2, 1);
  oracle.weight << -60.0, 60.0;
  Eigen::MatrixXd s(37, 1);
  for (Eigen::Index i = 0; i < 37; ++i) s(i, 0) = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
  CHECK(codelength_bits(oracle, s, y) < 1e-30);

  const LinearProbe four(4, 5);
  std::vector<int> z(37, 3);
  CHECK(codelength_bits(four, x, z) == doctest::Approx(74.0));
  z[0] = 4;
  CHECK_THROWS_AS(codelength_bits(four, x, z), DomainError);
}

TEST_CASE("space saving") {
  CHECK(space_saving(0, 100) == 1.0);
  CHECK(space_saving(100, 100) == 0.0);
  CHECK(space_saving(120, 100) == doctest::Approx(-0.2));
  CHECK(space_saving(50, 100) > space_saving(60, 100));
  CHECK_THROWS_AS(space_saving(1, 0), DomainError);
}

TEST_CASE("first batch is scored by the initial uniform probe") {
  const auto batches = blobs(640, 5.0, 1);
  ProbeConfig cfg;
  cfg.seed = 4;
  const auto r = prequential_fit(batches, 2, cfg);
  REQUIRE(r.batch_bits.size() == batches.size());
  CHECK(r.batch_bits[0] == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(r.codelength == doctest::Approx(std::accumulate(r.batch_bits.begin(), r.batch_bits.end(), 0.0)));
  CHECK(r.samples == 640);
}

TEST_CASE("separable blobs") {
  const auto batches = blobs(2000, 5.0, 2);
  CHECK(batch_logistic_accuracy(batches) > 0.98);
  ProbeConfig cfg;
  cfg.seed = 5;
  PrequentialAudit audit;
  const auto r = prequential_fit(batches, 2, cfg, std::ref(audit));
  CHECK(audit.violations() == 0);
  CHECK(audit.events() == 2 * batches.size());
  CHECK(space_saving(r.codelength, 2000.0) > 0.9);
}

TEST_CASE("audit flags out-of-order events") {
  PrequentialAudit a;
  a(ProbeEvent::Update, 0);
  CHECK(a.violations() == 1);
  PrequentialAudit b;
  b(ProbeEvent::Evaluate, 0);
  b(ProbeEvent::Update, 0);
  b(ProbeEvent::Evaluate, 0);
  CHECK(b.violations() == 1);
  PrequentialAudit c;
  c(ProbeEvent::Evaluate, 0);
  c(ProbeEvent::Update, 0);
  c(ProbeEvent::Evaluate, 1);
  c(ProbeEvent::Update, 1);
  CHECK(c.violations() == 0);
}

TEST_CASE("one-hot label features and random controls") {
  const auto tasks = build_task_hierarchy(2, 250);
  const auto& mid = find_task(tasks, "Mid");
  double sv = 0, ctrl = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto set = label_one_hot(mid, 20000, 100 + seed);
    ProbeConfig cfg;
    cfg.seed = seed;
    const auto truth = run_probe(set, mid, cfg, false);
    const auto control = run_probe(set, mid, cfg, true);
    CHECK(truth.accuracy == 1.0);
    CHECK(control.is_control);
    sv += truth.space_saving / 3;
    ctrl += control.space_saving / 3;
  }
  CHECK(sv >= 0.95);
  CHECK(ctrl <= 0.05);
}

TEST_CASE("report bookkeeping and determinism") {
  const auto tasks = build_task_hierarchy(2, 250);
  const auto& lh = find_task(tasks, "LH");
  // Rows from the whole band; only LH frequencies take part.
  const auto set = label_one_hot(find_task(tasks, "Mid"), 3000, 7);
  ProbeConfig cfg;
  cfg.seed = 11;
  const auto a = run_probe(set, lh, cfg, false);
  const auto b = run_probe(set, lh, cfg, false);
  CHECK(a.codelength_total == b.codelength_total);
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.per_frequency_accuracy == b.per_frequency_accuracy);
  CHECK(a.task == "LH");
  CHECK(a.tap == "out");
  CHECK(a.classes == 2);
  CHECK(a.codelength_uniform == doctest::Approx(static_cast<double>(a.stream_samples)));
  CHECK(a.space_saving == doctest::Approx(1.0 - a.codelength_total / a.codelength_uniform));
  for (const auto& [f, acc] : a.per_frequency_accuracy) {
    CHECK(f >= lh.lo);
    CHECK(f <= lh.hi);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
  }
  std::size_t in_band = 0;
  for (auto f : set.frequencies) in_band += label_window(lh, f) != BandLabel::Excluded;
  CHECK(a.stream_samples + a.test_samples == in_band);

  // Frequency identity: one class per distinct frequency.
  ActivationSet small = set;
  const auto freq = run_probe(small, std::nullopt, cfg, false);
  CHECK(freq.task == "freq");
  CHECK(freq.classes == 249);
}

TEST_CASE("explicit split is honoured") {
  const auto tasks = build_task_hierarchy(2, 250);
  const auto& mid = find_task(tasks, "Mid");
  const auto set = label_one_hot(mid, 1000, 8);
  std::vector<std::uint8_t> split(1000, 0);
  for (std::size_t i = 0; i < 100; ++i) split[i] = 2;
  for (std::size_t i = 100; i < 200; ++i) split[i] = 1;
  ProbeConfig cfg;
  const auto r = run_probe(set, mid, cfg, false, &split);
  CHECK(r.test_samples == 100);
  CHECK(r.stream_samples == 900);
  split.pop_back();
  CHECK_THROWS_AS(run_probe(set, mid, cfg, false, &split), DimensionError);
}

TEST_CASE("degradation gap") {
  ProbeReport r;
  r.per_frequency_accuracy = {{10, 1.0}, {32, 0.4}, {40, 0.95}};
  CHECK(degradation_gap(r, 0.6) == std::vector<int>{32});
  r.per_frequency_accuracy = {{10, 1.0}, {20, 1.0}};
  CHECK(degradation_gap(r, 0.6).empty());
}

TEST_CASE("configuration ranges") {
  ProbeConfig c;
  CHECK_NOTHROW(c.validate());
  c.replay_streams = 6;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.batch_size = 100;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.dropout = 0.35;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.ema_decay = 0.2;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.noise_level = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.lr = -1;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("input errors") {
  ProbeConfig cfg;
  CHECK_THROWS_AS(prequential_fit({}, 2, cfg), DomainError);
  std::vector<ProbeBatch> one{{Eigen::MatrixXd::Zero(4, 2), {0, 1, 0, 2}}};
  CHECK_THROWS_AS(prequential_fit(one, 2, cfg), DomainError);
  std::vector<ProbeBatch> two{{Eigen::MatrixXd::Zero(2, 2), {0, 1}}, {Eigen::MatrixXd::Zero(2, 3), {0, 1}}};
  CHECK_THROWS_AS(prequential_fit(two, 2, cfg), DimensionError);
}

}  // TEST_SUITE
