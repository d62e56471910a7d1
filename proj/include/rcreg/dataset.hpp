#pragma once

#include <Eigen/Dense>

namespace rcreg {

/// n observations of (Y, X) with X = (1, W')'.
class Dataset {
 public:
  Dataset() = default;
  /// Throws DimensionError on mismatched sizes or n < p, DomainError when the
  /// first column of X is not identically one.
  Dataset(Eigen::MatrixXd X, Eigen::VectorXd Y);

  /// Prepends the intercept column to the covariates W (n x (p-1)).
  static Dataset from_covariates(const Eigen::Ref<const Eigen::MatrixXd>& W, Eigen::VectorXd Y);

  int n() const { return static_cast<int>(X_.rows()); }
  int p() const { return static_cast<int>(X_.cols()); }
  const Eigen::MatrixXd& X() const { return X_; }
  const Eigen::VectorXd& Y() const { return Y_; }

 private:
  Eigen::MatrixXd X_;
  Eigen::VectorXd Y_;
};

}  // namespace rcreg
