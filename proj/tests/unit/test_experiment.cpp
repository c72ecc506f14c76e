#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "fake_model.hpp"
#include "freqprobe/errors.hpp"
#include "freqprobe/experiment.hpp"

using namespace freqprobe;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const char* name) {
  const auto dir = fs::temp_directory_path() / "freqprobe_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("tap subsets") {
  const auto subsets = standard_tap_subsets();
  REQUIRE(subsets.size() == 12);
  std::vector<std::string> labels;
  for (const auto& s : subsets) labels.push_back(subset_label(s));
  CHECK(labels == std::vector<std::string>{"0", "1", "2", "3", "4", "01", "012", "0123", "01234",
                                           "1234", "234", "34"});
  CHECK(subset_label({}) == "baseline");
  for (const auto& s : subsets) CHECK(parse_subset(subset_label(s)) == s);
  CHECK_THROWS_AS(parse_subset(""), DomainError);
  CHECK_THROWS_AS(parse_subset("5"), DomainError);
  CHECK_THROWS_AS(parse_subset("10"), DomainError);
  CHECK_THROWS_AS(parse_subset("11"), DomainError);
}

TEST_CASE("stacking and dominant frequencies") {
  LabeledWindows w;
  for (int f : {10, 64, 200}) {
    w.windows.push_back({make_sinusoid(f, 512, 512, 0.2), f, 0.2, 0});
    w.labels.push_back(f);
  }
  const auto X = stack_windows(w);
  CHECK(X.rows() == 3);
  CHECK(X.cols() == 512);
  CHECK(dominant_frequencies(X, 512) == std::vector<double>{10, 64, 200});
  CHECK(stack_windows(LabeledWindows{}).size() == 0);
}

TEST_CASE("input/output curve with reference generators") {
  const Generator copy = [](const Eigen::MatrixXd& x) { return x; };
  const Generator zero = [](const Eigen::MatrixXd& x) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Zero(x.rows(), x.cols()));
  };
  const std::vector<int> freqs{2, 50, 128, 250};
  const auto id = input_output_curve(copy, freqs, 4, 512, 512, 1);
  const auto flat = input_output_curve(zero, freqs, 4, 512, 512, 1);
  REQUIRE(id.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(id[i].f == freqs[i]);
    CHECK(id[i].mean == freqs[i]);
    CHECK(id[i].std == 0.0);
    CHECK(flat[i].mean == 0.0);
    CHECK(flat[i].std == 0.0);
  }
  CHECK_THROWS_AS(input_output_curve(copy, freqs, 0, 512, 512, 1), DomainError);
}

TEST_CASE("erasure experiment on a tapped model") {
  SignalConfig sig;
  sig.window = 16;
  sig.fs = 512;
  const auto data = build_erasure_dataset(sig, 20, 5, 0.7, 2);
  const auto tasks = build_task_hierarchy(sig.f_min, sig.f_max);
  FakeTappedModel model(16, 6, 9);
  ErasureOptions opt;
  opt.generate_length = 512;
  const std::vector<TapSubset> subsets{{0}, {3, 4}, {0, 1, 2, 3, 4}};
  const auto rows = erasure_experiment(model, data, find_task(tasks, "Mid"), subsets, opt);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].subset == "baseline");
  CHECK_FALSE(rows[0].p_value.has_value());
  CHECK(rows[0].erasers.empty());
  CHECK(rows[0].squared_errors.size() == data.test.size());
  CHECK(rows[2].subset == "34");
  CHECK(rows[2].erasers.size() == 2);
  CHECK(rows[2].erasers[0].tap == "dec3");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].p_value.has_value());
    CHECK(*rows[i].p_value >= 0.0);
    CHECK(*rows[i].p_value <= 1.0);
    CHECK(rows[i].significant == (*rows[i].p_value < opt.alpha));
    double mse = 0;
    for (double e : rows[i].squared_errors) mse += e / static_cast<double>(rows[i].squared_errors.size());
    CHECK(rows[i].rmse == doctest::Approx(std::sqrt(mse)));
  }
  // Removing the task concept at the read-out layer moves the generated frequencies.
  CHECK(rows[3].rmse != rows[0].rmse);

  const auto csv = scratch("erasure.csv");
  write_erasure_csv(csv, rows);
  const auto text = slurp(csv);
  CHECK(text.rfind("subset,rmse,p_value,significant,n\nbaseline,", 0) == 0);
  CHECK(text.find("\n01234,") != std::string::npos);
}

TEST_CASE("csv emitters") {
  ProbeReport a;
  a.task = "LL";
  a.tap = "dec0";
  a.space_saving = 0.5;
  a.accuracy = 0.75;
  a.per_frequency_accuracy = {{2, 1.0}, {4, 0.5}};
  ProbeReport c = a;
  c.space_saving = -0.01;
  c.is_control = true;
  const auto sv = scratch("sv.csv");
  write_sv_csv(sv, {a}, {c});
  CHECK(slurp(sv) == "layer,task,sv,sv_control,accuracy\ndec0,LL,0.5,-0.01,0.75\n");

  const auto acc = scratch("acc.csv");
  const auto tasks = build_task_hierarchy(2, 250);
  write_accuracy_csv(acc, {a}, tasks, 2, 5);
  CHECK(slurp(acc) ==
        "task,layer,f_hz,accuracy\nLL,dec0,2,1\nLL,dec0,3,missing\nLL,dec0,4,0.5\nLL,dec0,5,missing\n");
  ProbeReport hh = a;
  hh.task = "HH";
  write_accuracy_csv(acc, {hh}, tasks, 2, 2);
  CHECK(slurp(acc) == "task,layer,f_hz,accuracy\nHH,dec0,2,excluded\n");

  const auto io = scratch("io.csv");
  write_io_csv(io, {{8, 8.0, 0.0}, {16, 15.5, 0.5}});
  CHECK(slurp(io) == "f,mean_fhat,std_fhat\n8,8,0\n16,15.5,0.5\n");
}

TEST_CASE("worker pool") {
  for (std::size_t workers : {1u, 3u}) {
    std::vector<std::atomic<int>> hits(50);
    parallel_for(50, workers, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("job 7");
                  }),
                  std::runtime_error);
  parallel_for(0, 4, [](std::size_t) { FAIL("no jobs expected"); });

  setenv("FREQPROBE_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  setenv("FREQPROBE_WORKERS", "zero", 1);
  CHECK(worker_count() >= 1);
  unsetenv("FREQPROBE_WORKERS");
}

}  // TEST_SUITE
