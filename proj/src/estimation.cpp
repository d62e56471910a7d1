#include "rcreg/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rcreg/errors.hpp"

namespace rcreg {

namespace {

Eigen::MatrixXd gram_of(const Eigen::Ref<const Eigen::MatrixXd>& X) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

Eigen::MatrixXd select(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  const auto s = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(s, s);
  for (Eigen::Index a = 0; a < s; ++a) {
    for (Eigen::Index b = 0; b < s; ++b) out(a, b) = m(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
  }
  return out;
}

}  // namespace

Eigen::VectorXd ols(const Eigen::Ref<const Eigen::VectorXd>& Y, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  if (X.rows() != Y.size()) throw DimensionError("design rows and response length differ");
  if (X.rows() < X.cols()) {
    throw SingularDesign("least squares needs at least as many observations (" + std::to_string(X.rows()) +
                         ") as columns (" + std::to_string(X.cols()) + ")");
  }
  const int r = numeric_rank(X);
  if (r < X.cols()) {
    throw SingularDesign("design has rank " + std::to_string(r) + " < " + std::to_string(X.cols()) + " columns");
  }
  const Eigen::MatrixXd g = gram_of(X);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw SingularDesign("normal equations are not positive definite");
  const Eigen::VectorXd rhs = X.transpose() * Y;
  Eigen::VectorXd beta = llt.solve(rhs);
  // One step of iterative refinement on the normal equations.
  beta += llt.solve(rhs - g * beta);
  return beta;
}

SecondStageDesign build_second_stage(const Dataset& data, const Eigen::VectorXd& mu_hat) {
  if (mu_hat.size() != data.p()) {
    throw DimensionError("mu_hat has length " + std::to_string(mu_hat.size()) + ", expected " +
                         std::to_string(data.p()));
  }
  SecondStageDesign s;
  s.ysig = (data.Y() - data.X() * mu_hat).array().square().matrix();
  s.xsig = v_transform_rows(data.X());
  return s;
}

AdaLassoConfig MomentProblem::config(double lambda) const {
  AdaLassoConfig cfg;
  cfg.lambda = lambda;
  cfg.init = sigma_init;
  cfg.penalize_mask = penalize_mask;
  return cfg;
}

MomentProblem prepare_moment_problem(const Dataset& data, bool penalize_intercept_variance) {
  const int d = half_length(data.p());
  if (data.n() < d) {
    throw SingularDesign("second stage needs n >= p(p+1)/2 = " + std::to_string(d) + ", got n = " +
                         std::to_string(data.n()));
  }
  Eigen::VectorXd mu_hat = ols(data.Y(), data.X());
  SecondStageDesign stage = build_second_stage(data, mu_hat);
  Eigen::VectorXd sigma_init = ols(stage.ysig, stage.xsig);
  std::vector<bool> mask(static_cast<std::size_t>(d), true);
  mask[0] = penalize_intercept_variance;
  return MomentProblem{std::move(mu_hat), std::move(sigma_init), std::move(mask),
                       WeightedLasso(stage.ysig, stage.xsig)};
}

MomentFit finish_fit(const MomentProblem& problem, LassoSolution sol, double lambda) {
  const int p = dim_from_half_length(static_cast<int>(sol.beta.size()));
  MomentFit fit;
  fit.mu_hat = problem.mu_hat;
  fit.sigma_init = problem.sigma_init;
  fit.sigma_hat = HalfVec(p, sol.beta);
  fit.Sigma_hat = unvec_half(fit.sigma_hat);
  fit.min_eigenvalue = min_eigenvalue(fit.Sigma_hat);
  fit.psd = fit.min_eigenvalue >= -1e-9;
  fit.lambda_used = lambda;
  fit.lasso = std::move(sol);
  return fit;
}

MomentFit fit_moments(const Dataset& data, double lambda_sigma, bool penalize_intercept_variance) {
  const MomentProblem problem = prepare_moment_problem(data, penalize_intercept_variance);
  return finish_fit(problem, problem.lasso.solve(problem.config(lambda_sigma)), lambda_sigma);
}

AutoFit fit_moments_auto(const Dataset& data, bool penalize_intercept_variance, int grid_size,
                         double grid_min_ratio) {
  const MomentProblem problem = prepare_moment_problem(data, penalize_intercept_variance);
  const AdaLassoConfig base = problem.config(0.0);
  const double top = problem.lasso.lambda_max(base);

  AutoFit out;
  if (!(top > 0)) {
    out.fit = finish_fit(problem, problem.lasso.solve(base), 0.0);
    return out;
  }
  const std::vector<double> grid = log_grid(top, grid_min_ratio, grid_size);
  const auto path = lambda_path(problem.lasso, base, grid);
  const double n = problem.lasso.n();
  // (1/n)|y - X b|^2 equals the smooth part of the objective.
  const double floor = std::numeric_limits<double>::min();
  std::size_t best = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    AdaLassoConfig c0 = base;
    c0.lambda = 0.0;
    PathPoint pt;
    pt.lambda = grid[i];
    pt.df = static_cast<int>(path[i].active_set.size());
    pt.rss = std::max(problem.lasso.objective(path[i].beta, c0), floor);
    pt.bic = n * std::log(pt.rss) + std::log(n) * pt.df;
    out.path.push_back(pt);
    if (pt.bic < out.path[best].bic) best = i;
  }
  out.fit = finish_fit(problem, path[best], grid[best]);
  return out;
}

LassoSolution select_means(const Dataset& data, double lambda_mu) {
  AdaLassoConfig cfg;
  cfg.lambda = lambda_mu;
  cfg.init = ols(data.Y(), data.X());
  cfg.penalize_mask.assign(static_cast<std::size_t>(data.p()), true);
  cfg.penalize_mask[0] = false;
  return adaptive_lasso(data.Y(), data.X(), cfg);
}

SandwichEstimate sandwich(const Dataset& data, const MomentFit& fit) {
  const SecondStageDesign stage = build_second_stage(data, fit.mu_hat);
  const Eigen::VectorXd& sigma = fit.sigma_hat.entries();
  if (sigma.size() != stage.xsig.cols()) throw DimensionError("fit does not match the dataset");
  const double inv_n = 1.0 / data.n();
  const Eigen::VectorXd resid = stage.ysig - stage.xsig * sigma;
  const Eigen::VectorXd w = resid.array().square().matrix();

  SandwichEstimate out;
  out.C_hat = inv_n * gram_of(stage.xsig);
  const Eigen::MatrixXd weighted = stage.xsig.array().colwise() * w.array().sqrt();
  out.B_hat = inv_n * gram_of(weighted);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.C_hat, Eigen::EigenvaluesOnly);
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmax > 0) || es.eigenvalues()(0) <= 1e-12 * lmax) {
    throw SingularGram("empirical Gram matrix of v(X) is numerically singular");
  }

  out.active_set = fit.lasso.active_set;
  if (out.active_set.empty()) {
    for (Eigen::Index k = 0; k < sigma.size(); ++k) {
      if (sigma(k) != 0.0) out.active_set.push_back(static_cast<int>(k));
    }
  }
  const Eigen::MatrixXd css = select(out.C_hat, out.active_set);
  const Eigen::MatrixXd bss = select(out.B_hat, out.active_set);
  if (css.size() == 0) {
    out.avar_S.resize(0, 0);
    return out;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(css);
  if (llt.info() != Eigen::Success) throw SingularGram("Gram block of the active set is singular");
  const Eigen::MatrixXd cinv_b = llt.solve(bss);
  out.avar_S = llt.solve(cinv_b.transpose());
  out.avar_S = 0.5 * (out.avar_S + out.avar_S.transpose()).eval();
  return out;
}

}  // namespace rcreg
