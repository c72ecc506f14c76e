#pragma once

// Closed-form least-squares concept erasure (LEACE) and sequential fitting
// across model taps.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "freqprobe/forecaster.hpp"
#include "freqprobe/tensor_store.hpp"

namespace freqprobe {

struct FittedEraser {
  Eigen::MatrixXd P;
  Eigen::VectorXd b;
  Eigen::VectorXd mean;  ///< feature mean of the fitting sample
  std::string tap;
  int rank_removed = 0;

  std::size_t dim() const { return static_cast<std::size_t>(P.rows()); }
  /// P h + b for a single vector.
  Eigen::VectorXd apply(const Eigen::VectorXd& h) const;
  /// Row-wise: H P^T + 1 b^T.
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& H) const;
  ErasureRecord to_record() const;
  static FittedEraser from_record(const ErasureRecord& rec);
};

struct LeaceOptions {
  double eigen_floor = 1e-8;     ///< relative to the largest eigenvalue of Cov(h)
  double rank_threshold = 1e-6;  ///< singular values below this times |std(y)| are kept
};

/// Fits on n x d features and an n x k concept matrix (centred internally).
/// Throws DomainError when k >= d or n <= d.
FittedEraser fit_leace(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Y,
                       const std::string& tap = {}, const LeaceOptions& opt = {});

/// Binary labels in {0,1} as one centred +-1 column.
Eigen::MatrixXd binary_concept(const std::vector<int>& labels);

/// Projection onto the complement of the class-mean difference direction,
/// mean preserving. Baseline for distortion comparisons.
FittedEraser fit_mean_difference(const Eigen::MatrixXd& H, const std::vector<int>& labels);

/// ||Cov(H, Y)||_F / (sqrt(tr Cov(H)) * sqrt(tr Cov(Y))); 0 when either side is constant.
double cross_covariance_ratio(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Y);

/// Mean of ||h - psi(h)||^2 over rows.
double mean_distortion(const FittedEraser& e, const Eigen::MatrixXd& H);

/// Fits one eraser per tap in the given order, each on activations extracted
/// with all previously fitted erasers active.
std::vector<FittedEraser> fit_sequential(const TappedModel& model,
                                         const std::vector<std::size_t>& taps,
                                         const Eigen::MatrixXd& contexts,
                                         const Eigen::MatrixXd& Y,
                                         const LeaceOptions& opt = {});

std::vector<ErasureRecord> to_records(const std::vector<FittedEraser>& erasers);

struct TapAudit {
  std::string tap;
  double ratio = 0.0;
};

/// Re-extracts every tap in `taps` with all erasers active and reports the
/// cross-covariance ratio against Y.
std::vector<TapAudit> audit_guardedness(const TappedModel& model,
                                        const std::vector<std::size_t>& taps,
                                        const Eigen::MatrixXd& contexts,
                                        const Eigen::MatrixXd& Y,
                                        const std::vector<FittedEraser>& erasers);

}  // namespace freqprobe
