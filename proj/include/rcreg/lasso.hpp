#pragma once

// Adaptive LASSO
//
//   argmin_beta  (1/n) |Y - X beta|^2 + 2 lambda sum_k w_k |beta_k|,
//   w_k = 1 / |init_k|,
//
// solved by cyclic coordinate descent on the Gram form. Coordinates with
// init_k == 0 are held at zero; coordinates outside penalize_mask get w_k = 0.

#include <Eigen/Dense>

#include <vector>

namespace rcreg {

struct AdaLassoConfig {
  double lambda = 0.0;
  Eigen::VectorXd init;             // empty: unit weights everywhere
  std::vector<bool> penalize_mask;  // empty: every coordinate penalized
  double tol = 1e-8;                // on the largest coordinate change per sweep
  int max_iter = 100000;            // full sweeps
};

struct LassoSolution {
  Eigen::VectorXd beta;
  std::vector<int> active_set;  // 0-based, beta_k != 0
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  std::vector<double> objective_trace;  // objective after each sweep
};

/// Sufficient statistics G = X'X/n, c = X'Y/n, yy = Y'Y/n of one regression;
/// every solve and every lambda on a path reuses them.
class WeightedLasso {
 public:
  WeightedLasso(const Eigen::Ref<const Eigen::VectorXd>& Y, const Eigen::Ref<const Eigen::MatrixXd>& X);
  WeightedLasso(Eigen::MatrixXd gram, Eigen::VectorXd xty, double yy, int n);

  int width() const { return static_cast<int>(gram_.rows()); }
  int n() const { return n_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::VectorXd& xty() const { return xty_; }

  /// Throws DimensionError when the config does not match the design width.
  LassoSolution solve(const AdaLassoConfig& cfg, const Eigen::VectorXd* warm_start = nullptr) const;

  /// Smallest lambda at which every penalized coordinate is zero.
  double lambda_max(const AdaLassoConfig& cfg) const;

  double objective(const Eigen::VectorXd& beta, const AdaLassoConfig& cfg) const;

  /// Gradient 2 (G beta - c) of the smooth part, i.e. (2/n) X'(X beta - Y).
  Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const;

  double kkt_residual(const Eigen::VectorXd& beta, const AdaLassoConfig& cfg) const;

 private:
  Eigen::MatrixXd gram_;
  Eigen::VectorXd xty_;
  double yy_ = 0.0;
  int n_ = 0;
};

LassoSolution adaptive_lasso(const Eigen::Ref<const Eigen::VectorXd>& Y,
                             const Eigen::Ref<const Eigen::MatrixXd>& X, const AdaLassoConfig& cfg);

/// Warm-started solutions along `grid` (descending); cfg.lambda is ignored.
std::vector<LassoSolution> lambda_path(const WeightedLasso& problem, const AdaLassoConfig& cfg,
                                       const std::vector<double>& grid);
std::vector<LassoSolution> lambda_path(const Eigen::Ref<const Eigen::VectorXd>& Y,
                                       const Eigen::Ref<const Eigen::MatrixXd>& X,
                                       const AdaLassoConfig& cfg, const std::vector<double>& grid);

/// `size` log-spaced values from hi down to hi * min_ratio.
std::vector<double> log_grid(double hi, double min_ratio, int size);

}  // namespace rcreg
