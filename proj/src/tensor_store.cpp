#include "freqprobe/tensor_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "freqprobe/errors.hpp"

namespace freqprobe {

namespace {

constexpr std::array<char, 4> kActivationMagic = {'F', 'Q', 'P', 'B'};
constexpr std::array<char, 4> kEraserMagic = {'F', 'Q', 'E', 'R'};
constexpr std::array<char, 4> kDatasetMagic = {'F', 'Q', 'D', 'S'};
constexpr std::array<char, 4> kWeightsMagic = {'F', 'Q', 'W', 'T'};

class ByteWriter {
 public:
  void magic(const std::array<char, 4>& m) {
    for (char c : m) buf_.push_back(static_cast<std::uint8_t>(c));
  }
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f32(float v) { put(std::bit_cast<std::uint32_t>(v), 4); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  void put(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void expect_header(const std::array<char, 4>& m) {
    if (bytes_.size() < 4 || !std::equal(m.begin(), m.end(), bytes_.begin(),
                                         [](char c, std::uint8_t b) {
                                           return static_cast<std::uint8_t>(c) == b;
                                         }))
      throw FormatError("bad magic");
    pos_ = 4;
    if (u32() != kFormatVersion) throw FormatError("unsupported version");
  }
  std::uint8_t u8() { need(1); return bytes_[pos_++]; }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(get(4))); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  /// Guards count*width against the remaining bytes before allocating.
  void need_elements(std::uint64_t count, std::uint64_t width) {
    if (width != 0 && count > remaining() / width) throw FormatError("truncated payload");
  }
  void expect_end() const {
    if (pos_ != bytes_.size())
      throw FormatError("size mismatch: " + std::to_string(bytes_.size() - pos_) +
                        " trailing bytes after declared payload");
  }

 private:
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void need(std::size_t n) const {
    if (n > remaining()) throw FormatError("truncated payload");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::size_t tap_index(std::string_view tap) {
  for (std::size_t i = 0; i < kTapIds.size(); ++i)
    if (kTapIds[i] == tap) return i;
  throw FormatError("unknown tap id '" + std::string(tap) + "'");
}

bool is_tap_id(std::string_view tap) {
  return std::find(kTapIds.begin(), kTapIds.end(), tap) != kTapIds.end();
}

void ActivationSet::validate() const {
  if (!is_tap_id(tap_id)) throw FormatError("unknown tap id '" + tap_id + "'");
  if (features.rows() == 0) throw FormatError("empty activation set");
  if (labels.size() != rows() || frequencies.size() != rows())
    throw FormatError("activation set row counts disagree");
}

void ErasureRecord::validate() const {
  if (P.rows() != P.cols() || b.size() != P.rows() || mu.size() != P.rows())
    throw DimensionError("eraser P, b and mu dimensions disagree");
  if (P.rows() == 0) throw DimensionError("eraser has zero dimension");
}

void ErasureRecord::check_dim(std::size_t d_model) const {
  validate();
  if (dim() != d_model)
    throw DimensionError("eraser for tap '" + layer_tap + "' has dimension " +
                         std::to_string(dim()) + ", model width is " +
                         std::to_string(d_model));
}

ErasureRecord ErasureRecord::identity(std::string tap, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  return {std::move(tap), Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(n),
          Eigen::VectorXd::Zero(n)};
}

WindowDataset WindowDataset::from_split(const DatasetSplit& split) {
  WindowDataset ds;
  auto add = [&](const LabeledWindows& part, std::uint8_t id) {
    for (std::size_t i = 0; i < part.size(); ++i) {
      const auto& w = part.windows[i];
      if (ds.window == 0) ds.window = w.samples.size();
      ds.samples.push_back(w.samples);
      ds.labels.push_back(part.labels[i]);
      ds.frequencies.push_back(w.frequency);
      ds.phases.push_back(w.phase);
      ds.offsets.push_back(w.source_offset);
      ds.split.push_back(id);
    }
  };
  add(split.train, 0);
  add(split.validation, 1);
  add(split.test, 2);
  return ds;
}

std::vector<std::uint8_t> encode_activations(const ActivationSet& set) {
  set.validate();
  ByteWriter w;
  w.magic(kActivationMagic);
  w.u32(kFormatVersion);
  w.str(set.tap_id);
  w.u64(set.rows());
  w.u64(set.d_model());
  for (Eigen::Index r = 0; r < set.features.rows(); ++r)
    for (Eigen::Index c = 0; c < set.features.cols(); ++c) w.f32(set.features(r, c));
  for (auto v : set.labels) w.i32(v);
  for (auto v : set.frequencies) w.i32(v);
  return w.take();
}

ActivationSet decode_activations(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_header(kActivationMagic);
  ActivationSet set;
  set.tap_id = r.str();
  const std::uint64_t n = r.u64();
  const std::uint64_t d = r.u64();
  if (n == 0) throw FormatError("empty activation set");
  if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d)
    throw FormatError("truncated payload");
  r.need_elements(n * d, 4);
  set.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < set.features.rows(); ++i)
    for (Eigen::Index j = 0; j < set.features.cols(); ++j) set.features(i, j) = r.f32();
  r.need_elements(n, 8);
  set.labels.resize(n);
  set.frequencies.resize(n);
  for (auto& v : set.labels) v = r.i32();
  for (auto& v : set.frequencies) v = r.i32();
  r.expect_end();
  set.validate();
  return set;
}

std::vector<std::uint8_t> encode_eraser(const ErasureRecord& rec) {
  rec.validate();
  ByteWriter w;
  w.magic(kEraserMagic);
  w.u32(kFormatVersion);
  w.str(rec.layer_tap);
  w.u64(rec.dim());
  for (Eigen::Index i = 0; i < rec.P.rows(); ++i)
    for (Eigen::Index j = 0; j < rec.P.cols(); ++j) w.f64(rec.P(i, j));
  for (Eigen::Index i = 0; i < rec.b.size(); ++i) w.f64(rec.b(i));
  for (Eigen::Index i = 0; i < rec.mu.size(); ++i) w.f64(rec.mu(i));
  return w.take();
}

ErasureRecord decode_eraser(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.expect_header(kEraserMagic);
  ErasureRecord rec;
  rec.layer_tap = r.str();
  const std::uint64_t d = r.u64();
  if (d == 0) throw DimensionError("eraser has zero dimension");
  if (d > (1u << 20)) throw FormatError("truncated payload");
  r.need_elements(d * d + 2 * d, 8);
  const auto n = static_cast<Eigen::Index>(d);
  rec.P.resize(n, n);
  rec.b.resize(n);
  rec.mu.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rec.P(i, j) = r.f64();
  for (Eigen::Index i = 0; i < n; ++i) rec.b(i) = r.f64();
  for (Eigen::Index i = 0; i < n; ++i) rec.mu(i) = r.f64();
  r.expect_end();
  return rec;
}

void write_activations(const std::filesystem::path& path, const ActivationSet& set) {
  spill(path, encode_activations(set));
}

ActivationSet read_activations(const std::filesystem::path& path) {
  return decode_activations(slurp(path));
}

void write_eraser(const std::filesystem::path& path, const ErasureRecord& rec) {
  spill(path, encode_eraser(rec));
}

ErasureRecord read_eraser(const std::filesystem::path& path) {
  return decode_eraser(slurp(path));
}

ErasureRecord read_eraser(const std::filesystem::path& path, std::size_t d_model) {
  ErasureRecord rec = read_eraser(path);
  rec.check_dim(d_model);
  return rec;
}

void write_dataset(const std::filesystem::path& path, const WindowDataset& ds) {
  const std::size_t n = ds.size();
  if (n == 0) throw FormatError("empty dataset");
  if (ds.labels.size() != n || ds.frequencies.size() != n || ds.phases.size() != n ||
      ds.offsets.size() != n || ds.split.size() != n)
    throw FormatError("dataset column lengths disagree");
  ByteWriter w;
  w.magic(kDatasetMagic);
  w.u32(kFormatVersion);
  w.u64(n);
  w.u64(ds.window);
  for (const auto& s : ds.samples) {
    if (s.size() != ds.window) throw FormatError("dataset window length disagrees");
    for (double v : s) w.f64(v);
  }
  for (auto v : ds.labels) w.i32(v);
  for (auto v : ds.frequencies) w.i32(v);
  for (auto v : ds.phases) w.f64(v);
  for (auto v : ds.offsets) w.i64(v);
  for (auto v : ds.split) w.u8(v);
  spill(path, w.take());
}

WindowDataset read_dataset(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  ByteReader r(bytes);
  r.expect_header(kDatasetMagic);
  WindowDataset ds;
  const std::uint64_t n = r.u64();
  ds.window = r.u64();
  if (n == 0) throw FormatError("empty dataset");
  if (ds.window != 0 && n > std::numeric_limits<std::uint64_t>::max() / ds.window)
    throw FormatError("truncated payload");
  r.need_elements(n * ds.window, 8);
  ds.samples.assign(n, std::vector<double>(ds.window));
  for (auto& s : ds.samples)
    for (auto& v : s) v = r.f64();
  r.need_elements(n, 4 + 4 + 8 + 8 + 1);
  ds.labels.resize(n);
  ds.frequencies.resize(n);
  ds.phases.resize(n);
  ds.offsets.resize(n);
  ds.split.resize(n);
  for (auto& v : ds.labels) v = r.i32();
  for (auto& v : ds.frequencies) v = r.i32();
  for (auto& v : ds.phases) v = r.f64();
  for (auto& v : ds.offsets) v = r.i64();
  for (auto& v : ds.split) {
    v = r.u8();
    if (v > 2) throw FormatError("invalid split id");
  }
  r.expect_end();
  return ds;
}

void write_weights(const std::filesystem::path& path, const WeightsFile& wf) {
  ByteWriter w;
  w.magic(kWeightsMagic);
  w.u32(kFormatVersion);
  w.str(wf.config_json);
  w.u64(wf.tensors.size());
  for (const auto& t : wf.tensors) {
    w.str(t.name);
    w.u64(static_cast<std::uint64_t>(t.value.rows()));
    w.u64(static_cast<std::uint64_t>(t.value.cols()));
    for (Eigen::Index i = 0; i < t.value.rows(); ++i)
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) w.f32(t.value(i, j));
  }
  spill(path, w.take());
}

WeightsFile read_weights(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  ByteReader r(bytes);
  r.expect_header(kWeightsMagic);
  WeightsFile wf;
  wf.config_json = r.str();
  const std::uint64_t count = r.u64();
  r.need_elements(count, 4 + 8 + 8);
  for (std::uint64_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = r.str();
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / cols)
      throw FormatError("truncated payload");
    r.need_elements(rows * cols, 4);
    t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < t.value.rows(); ++i)
      for (Eigen::Index j = 0; j < t.value.cols(); ++j) t.value(i, j) = r.f32();
    wf.tensors.push_back(std::move(t));
  }
  r.expect_end();
  return wf;
}

}  // namespace freqprobe
