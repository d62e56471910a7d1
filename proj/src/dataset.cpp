#include "rcreg/dataset.hpp"

#include <string>

#include "rcreg/errors.hpp"

namespace rcreg {

Dataset::Dataset(Eigen::MatrixXd X, Eigen::VectorXd Y) : X_(std::move(X)), Y_(std::move(Y)) {
  if (X_.cols() < 1) throw DimensionError("design needs at least the intercept column");
  if (X_.rows() != Y_.size()) {
    throw DimensionError("design has " + std::to_string(X_.rows()) + " rows but response has " +
                         std::to_string(Y_.size()) + " entries");
  }
  if (X_.rows() < X_.cols()) {
    throw DimensionError("need n >= p, got n=" + std::to_string(X_.rows()) +
                         ", p=" + std::to_string(X_.cols()));
  }
  if ((X_.col(0).array() != 1.0).any()) throw DomainError("first design column must be all ones");
}

Dataset Dataset::from_covariates(const Eigen::Ref<const Eigen::MatrixXd>& W, Eigen::VectorXd Y) {
  Eigen::MatrixXd X(W.rows(), W.cols() + 1);
  X.col(0).setOnes();
  X.rightCols(W.cols()) = W;
  return Dataset(std::move(X), std::move(Y));
}

}  // namespace rcreg
