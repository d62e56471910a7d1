#include "rcreg/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rcreg/errors.hpp"

namespace rcreg {

namespace {

struct Penalty {
  std::vector<bool> free;     // false: held at zero
  Eigen::VectorXd weight;     // 0 for unpenalized coordinates
};

Penalty make_penalty(const AdaLassoConfig& cfg, int d) {
  if (cfg.init.size() != 0 && cfg.init.size() != d) {
    throw DimensionError("init has length " + std::to_string(cfg.init.size()) + ", design width is " +
                         std::to_string(d));
  }
  if (!cfg.penalize_mask.empty() && static_cast<int>(cfg.penalize_mask.size()) != d) {
    throw DimensionError("penalize_mask has length " + std::to_string(cfg.penalize_mask.size()) +
                         ", design width is " + std::to_string(d));
  }
  if (!(cfg.lambda >= 0)) throw DomainError("lambda must be nonnegative");
  if (!(cfg.tol > 0)) throw DomainError("tol must be positive");

  Penalty pen;
  pen.free.assign(static_cast<std::size_t>(d), true);
  pen.weight = Eigen::VectorXd::Ones(d);
  for (int k = 0; k < d; ++k) {
    const bool penalized = cfg.penalize_mask.empty() || cfg.penalize_mask[static_cast<std::size_t>(k)];
    if (cfg.init.size() != 0) {
      if (cfg.init(k) == 0.0) {
        pen.free[static_cast<std::size_t>(k)] = false;
        pen.weight(k) = 0.0;
        continue;
      }
      pen.weight(k) = 1.0 / std::abs(cfg.init(k));
    }
    if (!penalized) pen.weight(k) = 0.0;
  }
  return pen;
}

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

std::vector<int> support_of(const Eigen::VectorXd& beta) {
  std::vector<int> s;
  for (Eigen::Index k = 0; k < beta.size(); ++k) {
    if (beta(k) != 0.0) s.push_back(static_cast<int>(k));
  }
  return s;
}

}  // namespace

WeightedLasso::WeightedLasso(const Eigen::Ref<const Eigen::VectorXd>& Y,
                             const Eigen::Ref<const Eigen::MatrixXd>& X)
    : n_(static_cast<int>(X.rows())) {
  if (X.rows() != Y.size()) throw DimensionError("design rows and response length differ");
  if (X.rows() == 0) throw DimensionError("empty design");
  const double inv_n = 1.0 / static_cast<double>(n_);
  gram_ = Eigen::MatrixXd::Zero(X.cols(), X.cols());
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose(), inv_n);
  gram_.triangularView<Eigen::StrictlyUpper>() = gram_.transpose();
  xty_ = inv_n * (X.transpose() * Y);
  yy_ = inv_n * Y.squaredNorm();
}

WeightedLasso::WeightedLasso(Eigen::MatrixXd gram, Eigen::VectorXd xty, double yy, int n)
    : gram_(std::move(gram)), xty_(std::move(xty)), yy_(yy), n_(n) {
  if (gram_.rows() != gram_.cols() || gram_.rows() != xty_.size()) {
    throw DimensionError("Gram matrix and cross-product vector do not match");
  }
}

Eigen::VectorXd WeightedLasso::gradient(const Eigen::VectorXd& beta) const {
  return 2.0 * (gram_ * beta - xty_);
}

double WeightedLasso::objective(const Eigen::VectorXd& beta, const AdaLassoConfig& cfg) const {
  const Penalty pen = make_penalty(cfg, width());
  const double smooth = beta.dot(gram_ * beta) - 2.0 * xty_.dot(beta) + yy_;
  return smooth + 2.0 * cfg.lambda * pen.weight.dot(beta.cwiseAbs());
}

double WeightedLasso::kkt_residual(const Eigen::VectorXd& beta, const AdaLassoConfig& cfg) const {
  const Penalty pen = make_penalty(cfg, width());
  const Eigen::VectorXd g = gradient(beta);
  double worst = 0.0;
  for (int k = 0; k < width(); ++k) {
    if (!pen.free[static_cast<std::size_t>(k)]) continue;
    const double thr = 2.0 * cfg.lambda * pen.weight(k);
    const double v = beta(k) != 0.0 ? std::abs(g(k) + thr * sign(beta(k)))
                                    : std::max(0.0, std::abs(g(k)) - thr);
    worst = std::max(worst, v);
  }
  return worst;
}

double WeightedLasso::lambda_max(const AdaLassoConfig& cfg) const {
  const int d = width();
  const Penalty pen = make_penalty(cfg, d);
  std::vector<int> unpen;
  for (int k = 0; k < d; ++k) {
    if (pen.free[static_cast<std::size_t>(k)] && pen.weight(k) == 0.0) unpen.push_back(k);
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  if (!unpen.empty()) {
    const auto u = static_cast<Eigen::Index>(unpen.size());
    Eigen::MatrixXd guu(u, u);
    Eigen::VectorXd cu(u);
    for (Eigen::Index a = 0; a < u; ++a) {
      cu(a) = xty_(unpen[static_cast<std::size_t>(a)]);
      for (Eigen::Index b = 0; b < u; ++b) {
        guu(a, b) = gram_(unpen[static_cast<std::size_t>(a)], unpen[static_cast<std::size_t>(b)]);
      }
    }
    const Eigen::VectorXd bu = guu.ldlt().solve(cu);
    for (Eigen::Index a = 0; a < u; ++a) beta(unpen[static_cast<std::size_t>(a)]) = bu(a);
  }
  const Eigen::VectorXd r = xty_ - gram_ * beta;
  double out = 0.0;
  for (int k = 0; k < d; ++k) {
    if (!pen.free[static_cast<std::size_t>(k)] || pen.weight(k) == 0.0) continue;
    out = std::max(out, std::abs(r(k)) / pen.weight(k));
  }
  return out;
}

LassoSolution WeightedLasso::solve(const AdaLassoConfig& cfg, const Eigen::VectorXd* warm_start) const {
  const int d = width();
  const Penalty pen = make_penalty(cfg, d);

  LassoSolution sol;
  sol.beta = Eigen::VectorXd::Zero(d);
  if (warm_start != nullptr) {
    if (warm_start->size() != d) throw DimensionError("warm start has the wrong length");
    sol.beta = *warm_start;
  }
  for (int k = 0; k < d; ++k) {
    if (!pen.free[static_cast<std::size_t>(k)]) sol.beta(k) = 0.0;
  }

  std::vector<int> order;
  for (int k = 0; k < d; ++k) {
    if (pen.free[static_cast<std::size_t>(k)]) order.push_back(k);
  }

  Eigen::VectorXd q = gram_ * sol.beta;  // G beta, kept current
  for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    double max_change = 0.0;
    for (int k : order) {
      const double gkk = gram_(k, k);
      const double old = sol.beta(k);
      double updated = 0.0;
      if (gkk > 0.0) {
        const double r = xty_(k) - (q(k) - gkk * old);
        const double thr = cfg.lambda * pen.weight(k);
        // Closed interval at the kink: |r| <= thr gives an exact zero.
        updated = std::abs(r) <= thr ? 0.0 : (r - sign(r) * thr) / gkk;
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        q.noalias() += gram_.col(k) * delta;
        sol.beta(k) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    sol.iterations = sweep;
    sol.objective_trace.push_back(objective(sol.beta, cfg));
    if (max_change < cfg.tol) {
      sol.kkt_residual = kkt_residual(sol.beta, cfg);
      if (sol.kkt_residual <= cfg.tol) {
        sol.converged = true;
        break;
      }
      if (max_change == 0.0) break;  // exact fixed point; residual is rounding
    }
  }
  if (!sol.converged) sol.kkt_residual = kkt_residual(sol.beta, cfg);
  sol.objective = objective(sol.beta, cfg);
  sol.active_set = support_of(sol.beta);
  return sol;
}

LassoSolution adaptive_lasso(const Eigen::Ref<const Eigen::VectorXd>& Y,
                             const Eigen::Ref<const Eigen::MatrixXd>& X, const AdaLassoConfig& cfg) {
  return WeightedLasso(Y, X).solve(cfg);
}

std::vector<LassoSolution> lambda_path(const WeightedLasso& problem, const AdaLassoConfig& cfg,
                                       const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] > grid[i - 1]) throw DomainError("lambda grid must be sorted in descending order");
  }
  std::vector<LassoSolution> path;
  path.reserve(grid.size());
  AdaLassoConfig c = cfg;
  for (double lam : grid) {
    c.lambda = lam;
    path.push_back(path.empty() ? problem.solve(c) : problem.solve(c, &path.back().beta));
  }
  return path;
}

std::vector<LassoSolution> lambda_path(const Eigen::Ref<const Eigen::VectorXd>& Y,
                                       const Eigen::Ref<const Eigen::MatrixXd>& X,
                                       const AdaLassoConfig& cfg, const std::vector<double>& grid) {
  return lambda_path(WeightedLasso(Y, X), cfg, grid);
}

std::vector<double> log_grid(double hi, double min_ratio, int size) {
  if (size < 1) throw DomainError("grid size must be positive");
  if (!(hi > 0) || !(min_ratio > 0) || !(min_ratio <= 1)) {
    throw DomainError("grid needs hi > 0 and 0 < min_ratio <= 1");
  }
  if (size == 1) return {hi};
  std::vector<double> g(static_cast<std::size_t>(size));
  const double step = std::log(min_ratio) / (size - 1);
  for (int i = 0; i < size; ++i) g[static_cast<std::size_t>(i)] = hi * std::exp(step * i);
  g.back() = hi * min_ratio;
  return g;
}

}  // namespace rcreg
