#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rcreg/errors.hpp"
#include "rcreg/estimation.hpp"

namespace rcreg {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

WitnessResult witness_check(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& Y,
                            const std::vector<int>& S, double lambda, const Eigen::VectorXd& init,
                            const std::optional<Eigen::VectorXd>& beta_star,
                            const std::vector<bool>& penalize_mask) {
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (Y.size() != n) throw DimensionError("design rows and response length differ");
  if (init.size() != d) throw DimensionError("init must have one entry per design column");
  if (beta_star && beta_star->size() != d) throw DimensionError("beta_star must have one entry per design column");
  if (!penalize_mask.empty() && static_cast<int>(penalize_mask.size()) != d) {
    throw DimensionError("penalize_mask must have one entry per design column");
  }
  if (static_cast<int>(S.size()) > n) throw DimensionError("support larger than the sample");

  std::vector<bool> in_s(static_cast<std::size_t>(d), false);
  for (int k : S) {
    if (k < 0 || k >= d) throw DimensionError("support index out of range");
    if (in_s[static_cast<std::size_t>(k)]) throw DomainError("support has a repeated index");
    in_s[static_cast<std::size_t>(k)] = true;
  }
  std::vector<int> Sc;
  for (int k = 0; k < d; ++k) {
    if (!in_s[static_cast<std::size_t>(k)]) Sc.push_back(k);
  }

  auto weight = [&](int k) {
    const bool penalized = penalize_mask.empty() || penalize_mask[static_cast<std::size_t>(k)];
    return penalized ? 1.0 / std::abs(init(k)) : 0.0;
  };

  const auto s = static_cast<Eigen::Index>(S.size());
  Eigen::MatrixXd xs(n, s);
  for (Eigen::Index a = 0; a < s; ++a) xs.col(a) = X.col(S[static_cast<std::size_t>(a)]);

  WitnessResult out;
  if (s > 0 && numeric_rank(xs) < s) throw SingularDesign("X_S does not have full column rank");

  const double inv_n = 1.0 / n;
  Eigen::MatrixXd gs = inv_n * (xs.transpose() * xs);
  Eigen::LDLT<Eigen::MatrixXd> gs_solver(gs);

  Eigen::VectorXd ref(s);
  if (beta_star) {
    for (Eigen::Index a = 0; a < s; ++a) ref(a) = (*beta_star)(S[static_cast<std::size_t>(a)]);
  } else if (s > 0) {
    ref = gs_solver.solve(inv_n * (xs.transpose() * Y));
  }
  const Eigen::VectorXd eps = s > 0 ? Eigen::VectorXd(Y - xs * ref) : Eigen::VectorXd(Y);

  Eigen::VectorXd ws(s);  // lambda w_S * sign(ref_S)
  for (Eigen::Index a = 0; a < s; ++a) {
    const int k = S[static_cast<std::size_t>(a)];
    if (init(k) == 0.0) throw DomainError("support index " + std::to_string(k) + " has a zero initial estimate");
    ws(a) = lambda * weight(k) * sign(ref(a));
  }

  Eigen::VectorXd proj_eps = eps;  // (I - P_S) eps
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(s);
  if (s > 0) {
    const Eigen::VectorXd xs_eps = inv_n * (xs.transpose() * eps);
    out.beta_tilde = ref + gs_solver.solve(xs_eps - ws);
    proj_eps -= xs * gs_solver.solve(xs_eps);
    shift = gs_solver.solve(ws);
  } else {
    out.beta_tilde.resize(0);
  }

  out.condition1 = true;
  out.dual_margin = std::numeric_limits<double>::infinity();
  for (int k : Sc) {
    if (init(k) == 0.0) continue;  // held at zero by construction
    const double z = (s > 0 ? inv_n * X.col(k).dot(xs * shift) : 0.0) + inv_n * X.col(k).dot(proj_eps);
    const double margin = lambda * weight(k) - std::abs(z);
    out.dual_margin = std::min(out.dual_margin, margin);
    if (!(margin > 0)) out.condition1 = false;
  }

  out.sign_match = true;
  for (Eigen::Index a = 0; a < s; ++a) {
    if (sign(out.beta_tilde(a)) != sign(ref(a))) out.sign_match = false;
  }

  if (out.condition1 && out.sign_match) {
    AdaLassoConfig cfg;
    cfg.lambda = lambda;
    cfg.init = init;
    cfg.penalize_mask = penalize_mask;
    cfg.tol = 1e-11;
    out.solution = adaptive_lasso(Y, X, cfg);
    out.solver_checked = true;
    double dev = 0.0;
    for (Eigen::Index a = 0; a < s; ++a) {
      dev = std::max(dev, std::abs(out.solution.beta(S[static_cast<std::size_t>(a)]) - out.beta_tilde(a)));
    }
    bool zeros = true;
    for (int k : Sc) zeros = zeros && out.solution.beta(k) == 0.0;
    out.solver_deviation = dev;
    out.solver_agrees = zeros && dev <= 1e-6;
  }
  return out;
}

}  // namespace rcreg
