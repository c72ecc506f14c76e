#pragma once

// Little-endian binary containers shared with the external activation
// exporter. One record per file.
//
// Activation file ("FQPB"):
//   magic[4] | version u32 | tap_id (u32 len + UTF-8) | n u64 | d u64 |
//   n*d float32 features (row-major) | n int32 labels | n int32 frequencies
//
// Eraser file ("FQER"):
//   magic[4] | version u32 | tap_id (u32 len + UTF-8) | d u64 |
//   d*d float64 P (row-major) | d float64 b | d float64 mu
//
// Window dataset file ("FQDS"):
//   magic[4] | version u32 | n u64 | T u64 | n*T float64 samples |
//   n int32 labels | n int32 frequencies | n float64 phases |
//   n int64 source offsets | n uint8 split (0 train, 1 validation, 2 test)
//
// Weights file ("FQWT"):
//   magic[4] | version u32 | config (u32 len + UTF-8 JSON) | count u64 |
//   count * { name (u32 len + UTF-8) | rows u64 | cols u64 |
//             rows*cols float32 row-major }

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/signal.hpp"

namespace freqprobe {

inline constexpr std::uint32_t kFormatVersion = 1;

inline constexpr std::array<std::string_view, 5> kTapIds = {"dec0", "dec1", "dec2",
                                                            "dec3", "out"};

/// Position of `tap` in kTapIds; throws FormatError for unknown ids.
std::size_t tap_index(std::string_view tap);
bool is_tap_id(std::string_view tap);

using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ActivationSet {
  std::string tap_id;
  FeatureMatrix features;  ///< n x d_model
  std::vector<std::int32_t> labels;
  std::vector<std::int32_t> frequencies;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t d_model() const { return static_cast<std::size_t>(features.cols()); }
  /// Throws FormatError when row counts or the tap id are inconsistent.
  void validate() const;
};

struct ErasureRecord {
  std::string layer_tap;
  Eigen::MatrixXd P;
  Eigen::VectorXd b;
  Eigen::VectorXd mu;

  std::size_t dim() const { return static_cast<std::size_t>(P.rows()); }
  void validate() const;
  /// Throws DimensionError unless dim() == d_model.
  void check_dim(std::size_t d_model) const;
  static ErasureRecord identity(std::string tap, std::size_t d);
};

struct WindowDataset {
  std::size_t window = 0;
  std::vector<std::vector<double>> samples;
  std::vector<std::int32_t> labels;
  std::vector<std::int32_t> frequencies;
  std::vector<double> phases;
  std::vector<std::int64_t> offsets;
  std::vector<std::uint8_t> split;

  std::size_t size() const { return samples.size(); }
  static WindowDataset from_split(const DatasetSplit& split);
};

struct NamedTensor {
  std::string name;
  Eigen::MatrixXf value;
};

struct WeightsFile {
  std::string config_json;
  std::vector<NamedTensor> tensors;
};

void write_activations(const std::filesystem::path& path, const ActivationSet& set);
ActivationSet read_activations(const std::filesystem::path& path);

void write_eraser(const std::filesystem::path& path, const ErasureRecord& rec);
ErasureRecord read_eraser(const std::filesystem::path& path);
/// Reads and checks the dimension against the consuming model width.
ErasureRecord read_eraser(const std::filesystem::path& path, std::size_t d_model);

void write_dataset(const std::filesystem::path& path, const WindowDataset& ds);
WindowDataset read_dataset(const std::filesystem::path& path);

void write_weights(const std::filesystem::path& path, const WeightsFile& w);
WeightsFile read_weights(const std::filesystem::path& path);

/// In-memory encoders, used by the file writers and by golden-byte tests.
std::vector<std::uint8_t> encode_activations(const ActivationSet& set);
ActivationSet decode_activations(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_eraser(const ErasureRecord& rec);
ErasureRecord decode_eraser(const std::vector<std::uint8_t>& bytes);

}  // namespace freqprobe
