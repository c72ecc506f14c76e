#include "freqprobe/eraser.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "freqprobe/errors.hpp"

namespace freqprobe {

namespace {

Eigen::MatrixXd centered(const Eigen::MatrixXd& X) {
  return X.rowwise() - X.colwise().mean();
}

}  // namespace

Eigen::VectorXd FittedEraser::apply(const Eigen::VectorXd& h) const {
  if (h.size() != P.cols()) throw DimensionError("eraser: dimension mismatch");
  return P * h + b;
}

Eigen::MatrixXd FittedEraser::apply_rows(const Eigen::MatrixXd& H) const {
  if (H.cols() != P.cols()) throw DimensionError("eraser: dimension mismatch");
  Eigen::MatrixXd out = H * P.transpose();
  out.rowwise() += b.transpose();
  return out;
}

ErasureRecord FittedEraser::to_record() const { return ErasureRecord{tap, P, b, mean}; }

FittedEraser FittedEraser::from_record(const ErasureRecord& rec) {
  rec.validate();
  FittedEraser e;
  e.P = rec.P;
  e.b = rec.b;
  e.mean = rec.mu;
  e.tap = rec.layer_tap;
  return e;
}

FittedEraser fit_leace(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Y,
                       const std::string& tap, const LeaceOptions& opt) {
  const Eigen::Index n = H.rows(), d = H.cols(), k = Y.cols();
  if (Y.rows() != n) throw DimensionError("fit_leace: feature and concept row counts differ");
  if (k < 1 || k >= d) throw DomainError("fit_leace: concept rank must satisfy 1 <= k < d");
  if (n <= d) throw DomainError("fit_leace: need more samples than feature dimensions");
  if (!H.allFinite() || !Y.allFinite()) throw NumericalError("fit_leace: non-finite input");

  FittedEraser e;
  e.tap = tap;
  e.mean = H.colwise().mean().transpose();
  const Eigen::MatrixXd Hc = H.rowwise() - e.mean.transpose();
  const Eigen::MatrixXd Yc = centered(Y);
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd cov_hh = (Hc.transpose() * Hc) * inv_n;
  const Eigen::MatrixXd cov_hy = (Hc.transpose() * Yc) * inv_n;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_hh);
  if (eig.info() != Eigen::Success) throw NumericalError("fit_leace: eigendecomposition failed");
  const Eigen::VectorXd lam = eig.eigenvalues();
  const double lmax = lam.maxCoeff();
  if (!(lmax > 0.0)) {
    // Constant features carry no concept.
    e.P = Eigen::MatrixXd::Identity(d, d);
    e.b = Eigen::VectorXd::Zero(d);
    return e;
  }
  const Eigen::VectorXd floored = lam.cwiseMax(opt.eigen_floor * lmax);
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const Eigen::MatrixXd W = V * floored.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
  const Eigen::MatrixXd W_pinv = V * floored.cwiseSqrt().asDiagonal() * V.transpose();

  const Eigen::MatrixXd M = W * cov_hy;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const double y_scale = std::sqrt((Yc.array().square().colwise().sum() * inv_n).sum());
  const double cut = opt.rank_threshold * y_scale;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > cut) ++r;
  e.rank_removed = static_cast<int>(r);
  if (r == 0) {
    e.P = Eigen::MatrixXd::Identity(d, d);
    e.b = Eigen::VectorXd::Zero(d);
    return e;
  }
  const Eigen::MatrixXd U = svd.matrixU().leftCols(r);
  e.P = Eigen::MatrixXd::Identity(d, d) - W_pinv * (U * U.transpose()) * W;
  e.b = e.mean - e.P * e.mean;
  return e;
}

Eigen::MatrixXd binary_concept(const std::vector<int>& labels) {
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DomainError("binary_concept: labels must be 0 or 1");
    Y(static_cast<Eigen::Index>(i), 0) = labels[i] == 1 ? 1.0 : -1.0;
  }
  if (Y.rows() > 0) Y.array() -= Y.mean();
  return Y;
}

FittedEraser fit_mean_difference(const Eigen::MatrixXd& H, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(H.rows()) != labels.size())
    throw DimensionError("fit_mean_difference: row counts differ");
  const Eigen::Index d = H.cols();
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(d), m1 = m0;
  double n0 = 0.0, n1 = 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == 1) {
      m1 += H.row(i).transpose();
      n1 += 1.0;
    } else {
      m0 += H.row(i).transpose();
      n0 += 1.0;
    }
  }
  if (n0 == 0.0 || n1 == 0.0) throw DomainError("fit_mean_difference: both classes required");
  Eigen::VectorXd u = m1 / n1 - m0 / n0;
  FittedEraser e;
  e.mean = H.colwise().mean().transpose();
  e.P = Eigen::MatrixXd::Identity(d, d);
  const double norm = u.norm();
  if (norm > 0.0) {
    u /= norm;
    e.P -= u * u.transpose();
    e.rank_removed = 1;
  }
  e.b = e.mean - e.P * e.mean;
  return e;
}

double cross_covariance_ratio(const Eigen::MatrixXd& H, const Eigen::MatrixXd& Y) {
  if (H.rows() != Y.rows() || H.rows() == 0) throw DimensionError("covariance audit: row counts differ");
  const Eigen::MatrixXd Hc = centered(H), Yc = centered(Y);
  const double n = static_cast<double>(H.rows());
  const double sh = std::sqrt(Hc.squaredNorm() / n);
  const double sy = std::sqrt(Yc.squaredNorm() / n);
  if (sh == 0.0 || sy == 0.0) return 0.0;
  return ((Hc.transpose() * Yc) / n).norm() / (sh * sy);
}

double mean_distortion(const FittedEraser& e, const Eigen::MatrixXd& H) {
  if (H.rows() == 0) return 0.0;
  return (H - e.apply_rows(H)).squaredNorm() / static_cast<double>(H.rows());
}

std::vector<ErasureRecord> to_records(const std::vector<FittedEraser>& erasers) {
  std::vector<ErasureRecord> out;
  out.reserve(erasers.size());
  for (const auto& e : erasers) out.push_back(e.to_record());
  return out;
}

std::vector<FittedEraser> fit_sequential(const TappedModel& model,
                                         const std::vector<std::size_t>& taps,
                                         const Eigen::MatrixXd& contexts,
                                         const Eigen::MatrixXd& Y, const LeaceOptions& opt) {
  for (std::size_t i = 1; i < taps.size(); ++i)
    if (taps[i] <= taps[i - 1]) throw DomainError("fit_sequential: taps must be in forward order");
  std::vector<FittedEraser> fitted;
  std::vector<ErasureRecord> active;
  for (std::size_t tap : taps) {
    if (tap >= kTapIds.size()) throw DomainError("fit_sequential: unknown tap index");
    const std::string name(kTapIds[tap]);
    try {
      const Eigen::MatrixXd H = model.tap_features(contexts, tap, active);
      FittedEraser e = fit_leace(H, Y, name, opt);
      active.push_back(e.to_record());
      fitted.push_back(std::move(e));
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "fitting eraser at tap " << name << ": " << ex.what();
      throw NumericalError(msg.str());
    }
  }
  return fitted;
}

std::vector<TapAudit> audit_guardedness(const TappedModel& model,
                                        const std::vector<std::size_t>& taps,
                                        const Eigen::MatrixXd& contexts,
                                        const Eigen::MatrixXd& Y,
                                        const std::vector<FittedEraser>& erasers) {
  const std::vector<ErasureRecord> active = to_records(erasers);
  std::vector<TapAudit> out;
  for (std::size_t tap : taps) {
    const Eigen::MatrixXd H = model.tap_features(contexts, tap, active);
    out.push_back({std::string(kTapIds[tap]), cross_covariance_ratio(H, Y)});
  }
  return out;
}

}  // namespace freqprobe
