#pragma once

// Two-stage moment estimation for Y = X'A with random coefficients A:
// OLS for the means, then a regression of squared residuals on v(X) for the
// half-vectorized covariance, sparsified by the adaptive LASSO.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "rcreg/dataset.hpp"
#include "rcreg/lasso.hpp"
#include "rcreg/moment_algebra.hpp"

namespace rcreg {

/// Throws SingularDesign when X lacks full column rank (numeric_rank) or has
/// fewer rows than columns.
Eigen::VectorXd ols(const Eigen::Ref<const Eigen::VectorXd>& Y, const Eigen::Ref<const Eigen::MatrixXd>& X);

struct SecondStageDesign {
  Eigen::VectorXd ysig;  // squared first-stage residuals
  Eigen::MatrixXd xsig;  // rows v(X_i)
};

SecondStageDesign build_second_stage(const Dataset& data, const Eigen::VectorXd& mu_hat);

/// Everything up to the choice of lambda. Re-solving for many lambdas (paths,
/// tuning) reuses the Gram matrix held by `lasso`.
struct MomentProblem {
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd sigma_init;  // second-stage OLS
  std::vector<bool> penalize_mask;
  WeightedLasso lasso;

  AdaLassoConfig config(double lambda) const;
};

MomentProblem prepare_moment_problem(const Dataset& data, bool penalize_intercept_variance = false);

struct MomentFit {
  Eigen::VectorXd mu_hat;
  Eigen::VectorXd sigma_init;
  HalfVec sigma_hat;
  SymMatrix Sigma_hat;
  bool psd = false;
  double min_eigenvalue = 0.0;
  double lambda_used = 0.0;
  LassoSolution lasso;
};

MomentFit finish_fit(const MomentProblem& problem, LassoSolution sol, double lambda);

/// Var(B0) (half-vector entry 0) is left unpenalized unless requested.
MomentFit fit_moments(const Dataset& data, double lambda_sigma, bool penalize_intercept_variance = false);

struct PathPoint {
  double lambda = 0.0;
  int df = 0;
  double rss = 0.0;  // (1/n) |Ysig - Xsig sigma|^2
  double bic = 0.0;  // n log(rss) + log(n) df
};

struct AutoFit {
  MomentFit fit;
  std::vector<PathPoint> path;
};

/// Picks lambda on a log grid below lambda_max by minimum BIC of the
/// second-stage fit (ties toward larger lambda).
AutoFit fit_moments_auto(const Dataset& data, bool penalize_intercept_variance = false, int grid_size = 50,
                         double grid_min_ratio = 1e-4);

/// Adaptive LASSO for the means with OLS initial weights; intercept unpenalized.
LassoSolution select_means(const Dataset& data, double lambda_mu);

struct SandwichEstimate {
  Eigen::MatrixXd C_hat;  // (1/n) sum v(X_i) v(X_i)'
  Eigen::MatrixXd B_hat;  // (1/n) sum w_i v(X_i) v(X_i)'
  std::vector<int> active_set;
  Eigen::MatrixXd avar_S;  // (C_SS)^-1 B_SS (C_SS)^-1
};

/// Plug-in weights w_i are squared second-stage residuals. Throws SingularGram
/// when C_SS cannot be inverted.
SandwichEstimate sandwich(const Dataset& data, const MomentFit& fit);

struct WitnessResult {
  bool condition1 = false;   // strict dual feasibility off S
  bool sign_match = false;   // sign(beta_tilde_S) == reference signs
  Eigen::VectorXd beta_tilde;  // |S| entries, in S order
  double dual_margin = 0.0;    // min over S^c of lambda w_k - |z_k|
  bool solver_checked = false;
  bool solver_agrees = false;
  double solver_deviation = 0.0;  // max |beta_hat_S - beta_tilde|
  LassoSolution solution;
};

/// Primal-dual witness for the adaptive LASSO with support guess S. With
/// `beta_star` the reference signs and noise come from the true coefficients,
/// otherwise from OLS on X_S. When both witness conditions hold the solver is
/// run and compared against beta_tilde. Throws SingularDesign if X_S is rank
/// deficient.
WitnessResult witness_check(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& Y,
                            const std::vector<int>& S, double lambda, const Eigen::VectorXd& init,
                            const std::optional<Eigen::VectorXd>& beta_star = std::nullopt,
                            const std::vector<bool>& penalize_mask = {});

}  // namespace rcreg
