#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace dqe {

// Zero-mean, unit-variance standardization fitted on the training split only.
// apply followed by invert is the identity to machine precision.
struct NormalizationStats {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;
  double target_mean = 0.0;
  double target_std = 1.0;

  /// rows: [samples x features]
  Eigen::MatrixXd standardize_features(const Eigen::MatrixXd& rows) const {
    return (rows.rowwise() - feature_mean.transpose()) * feature_std.cwiseInverse().asDiagonal();
  }
  Eigen::MatrixXd destandardize_features(const Eigen::MatrixXd& rows) const {
    return (rows * feature_std.asDiagonal()).rowwise() + feature_mean.transpose();
  }
  Eigen::VectorXd standardize_targets(const Eigen::VectorXd& y) const {
    return ((y.array() - target_mean) / target_std).matrix();
  }
  Eigen::VectorXd destandardize_targets(const Eigen::VectorXd& y) const {
    return (y.array() * target_std + target_mean).matrix();
  }

  void validate(Eigen::Index expected_features) const {
    if (feature_mean.size() != expected_features || feature_std.size() != expected_features)
      throw std::invalid_argument("NormalizationStats: feature dimension mismatch");
    if (target_std <= 0.0 || (feature_std.array() <= 0.0).any())
      throw std::invalid_argument("NormalizationStats: standard deviations must be positive");
  }
};

}  // namespace dqe
