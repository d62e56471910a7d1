#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rcreg/errors.hpp"
#include "rcreg/estimation.hpp"
#include "rcreg/lasso.hpp"

using namespace rcreg;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd Y;
  Eigen::VectorXd beta;
};

Problem random_problem(std::mt19937_64& gen, int n, int d, double noise) {
  Problem pr;
  pr.X = oracle::random_matrix(gen, n, d, -2, 2);
  pr.beta = Eigen::VectorXd::Zero(d);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < d; k += 2) pr.beta(k) = u(gen);
  std::normal_distribution<double> z(0, noise);
  pr.Y = pr.X * pr.beta;
  for (int i = 0; i < n; ++i) pr.Y(i) += z(gen);
  return pr;
}

// n x d design with X'X / n = I exactly.
Eigen::MatrixXd orthonormal_design(std::mt19937_64& gen, int n, int d) {
  const Eigen::MatrixXd q = oracle::random_matrix(gen, n, d).householderQr().householderQ() *
                            Eigen::MatrixXd::Identity(n, d);
  return std::sqrt(static_cast<double>(n)) * q;
}

}  // namespace

TEST_CASE("lambda = 0 equals least squares") {
  std::mt19937_64 gen(1);
  for (int t = 0; t < 10; ++t) {
    const Problem pr = random_problem(gen, 80, 6, 0.5);
    AdaLassoConfig cfg;
    cfg.lambda = 0;
    cfg.tol = 1e-12;
    const LassoSolution s = adaptive_lasso(pr.Y, pr.X, cfg);
    CHECK(s.converged);
    CHECK((s.beta - oracle::qr_ols(pr.X, pr.Y)).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("orthonormal design: closed-form soft-thresholding") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 10; ++t) {
    const int n = 60, d = 8;
    const Eigen::MatrixXd X = orthonormal_design(gen, n, d);
    const Eigen::VectorXd Y = oracle::random_matrix(gen, n, 1, -3, 3).col(0);
    AdaLassoConfig cfg;
    cfg.lambda = 0.05 * (t + 1);
    cfg.init = oracle::random_matrix(gen, d, 1, 0.2, 2).col(0);
    cfg.init(3) = -cfg.init(3);
    cfg.tol = 1e-12;
    const LassoSolution s = adaptive_lasso(Y, X, cfg);
    const Eigen::VectorXd z = X.transpose() * Y / n;
    for (int k = 0; k < d; ++k) {
      CHECK(std::abs(s.beta(k) - oracle::soft_threshold(z(k), cfg.lambda / std::abs(cfg.init(k)))) <= 1e-8);
    }
  }
}

TEST_CASE("large lambda kills every penalized coordinate") {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd X = orthonormal_design(gen, 50, 5);
  const Eigen::VectorXd Y = oracle::random_matrix(gen, 50, 1).col(0);
  AdaLassoConfig cfg;
  cfg.init = Eigen::VectorXd::Constant(5, 0.5);
  const Eigen::VectorXd z = X.transpose() * Y / 50.0;
  cfg.lambda = (cfg.init.cwiseProduct(z)).cwiseAbs().maxCoeff();
  const LassoSolution s = adaptive_lasso(Y, X, cfg);
  CHECK(s.beta.isZero(0));
  CHECK(s.active_set.empty());
  const WeightedLasso wl(Y, X);
  CHECK(wl.lambda_max(cfg) == doctest::Approx(cfg.lambda).epsilon(1e-12));
}

TEST_CASE("zero initial estimate pins the coordinate at zero") {
  std::mt19937_64 gen(4);
  const Problem pr = random_problem(gen, 100, 5, 0.1);
  AdaLassoConfig cfg;
  cfg.lambda = 1e-3;
  cfg.init = Eigen::VectorXd::Ones(5);
  cfg.init(0) = 0.0;
  cfg.init(2) = 0.0;
  const LassoSolution s = adaptive_lasso(pr.Y, pr.X, cfg);
  CHECK(s.beta(0) == 0.0);
  CHECK(s.beta(2) == 0.0);
  CHECK(oracle::kkt_violation(pr.X, pr.Y, s.beta, cfg) <= 10 * cfg.tol);
}

TEST_CASE("unpenalized coordinates solve their normal equations") {
  std::mt19937_64 gen(5);
  const Problem pr = random_problem(gen, 200, 6, 1.0);
  AdaLassoConfig cfg;
  cfg.lambda = 10.0;
  cfg.penalize_mask = {false, true, true, true, true, false};
  const LassoSolution s = adaptive_lasso(pr.Y, pr.X, cfg);
  CHECK(s.converged);
  for (int k = 1; k < 5; ++k) CHECK(s.beta(k) == 0.0);
  const Eigen::VectorXd g = pr.X.transpose() * (pr.X * s.beta - pr.Y) * (2.0 / 200);
  CHECK(std::abs(g(0)) <= 1e-7);
  CHECK(std::abs(g(5)) <= 1e-7);
}

TEST_CASE("KKT certificate and monotone objective on random problems") {
  std::mt19937_64 gen(6);
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const int d = 2 + static_cast<int>(gen() % 12);
    const Problem pr = random_problem(gen, 3 * d + 10, d, 0.7);
    AdaLassoConfig cfg;
    cfg.init = oracle::qr_ols(pr.X, pr.Y);
    cfg.lambda = std::pow(10.0, -3.0 + 3.0 * static_cast<double>(gen() % 1000) / 1000.0);
    cfg.tol = 1e-9;
    if (t % 3 == 0) {
      cfg.penalize_mask.assign(static_cast<std::size_t>(d), true);
      cfg.penalize_mask[0] = false;
    }
    const LassoSolution s = adaptive_lasso(pr.Y, pr.X, cfg);
    REQUIRE(s.converged);
    CHECK(s.kkt_residual <= cfg.tol);
    CHECK(oracle::kkt_violation(pr.X, pr.Y, s.beta, cfg) <= 10 * cfg.tol);
    for (std::size_t i = 1; i < s.objective_trace.size(); ++i) {
      CHECK(s.objective_trace[i] <= s.objective_trace[i - 1] + 1e-12 * std::abs(s.objective_trace[i - 1]));
    }
    std::vector<int> active;
    for (int k = 0; k < d; ++k) {
      if (s.beta(k) != 0) active.push_back(k);
    }
    CHECK(active == s.active_set);
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("solver reports non-convergence instead of throwing") {
  std::mt19937_64 gen(7);
  Problem pr = random_problem(gen, 50, 10, 1.0);
  pr.X.col(1) = pr.X.col(0) + 1e-6 * pr.X.col(2);
  AdaLassoConfig cfg;
  cfg.lambda = 1e-6;
  cfg.max_iter = 2;
  cfg.tol = 1e-14;
  const LassoSolution s = adaptive_lasso(pr.Y, pr.X, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 2);
  CHECK(s.beta.allFinite());
}

TEST_CASE("config validation") {
  std::mt19937_64 gen(8);
  const Problem pr = random_problem(gen, 30, 3, 1.0);
  AdaLassoConfig cfg;
  cfg.lambda = -1;
  CHECK_THROWS_AS(adaptive_lasso(pr.Y, pr.X, cfg), DomainError);
  cfg.lambda = 1;
  cfg.init = Eigen::VectorXd::Ones(4);
  CHECK_THROWS_AS(adaptive_lasso(pr.Y, pr.X, cfg), DimensionError);
  cfg.init.resize(0);
  cfg.penalize_mask = {true};
  CHECK_THROWS_AS(adaptive_lasso(pr.Y, pr.X, cfg), DimensionError);
  cfg.penalize_mask.clear();
  cfg.tol = 0;
  CHECK_THROWS_AS(adaptive_lasso(pr.Y, pr.X, cfg), DomainError);
}

TEST_CASE("scaling Y by c scales the solution when init and lambda follow") {
  // Substituting b = c u turns the objective for (cY, c init, c^2 lambda)
  // into c^2 times the objective for (Y, init, lambda).
  std::mt19937_64 gen(9);
  const Problem pr = random_problem(gen, 120, 6, 0.8);
  AdaLassoConfig cfg;
  cfg.init = oracle::qr_ols(pr.X, pr.Y);
  cfg.lambda = 0.05;
  cfg.tol = 1e-13;
  const LassoSolution a = adaptive_lasso(pr.Y, pr.X, cfg);
  for (double c : {0.5, 3.0, 40.0}) {
    AdaLassoConfig scaled = cfg;
    scaled.init = c * cfg.init;
    scaled.lambda = c * c * cfg.lambda;
    const LassoSolution b = adaptive_lasso(c * pr.Y, pr.X, scaled);
    CHECK((b.beta - c * a.beta).cwiseAbs().maxCoeff() <= 1e-8 * c);
    CHECK(b.active_set == a.active_set);
  }
  AdaLassoConfig zero = cfg;
  zero.lambda = 0;
  const LassoSolution z1 = adaptive_lasso(pr.Y, pr.X, zero);
  const LassoSolution z2 = adaptive_lasso(7.0 * pr.Y, pr.X, zero);
  CHECK((z2.beta - 7.0 * z1.beta).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lambda_path endpoints, monotone supports and warm starts") {
  std::mt19937_64 gen(10);
  const int n = 80, d = 7;
  const Eigen::MatrixXd X = orthonormal_design(gen, n, d);
  const Eigen::VectorXd Y = oracle::random_matrix(gen, n, 1, -2, 2).col(0);
  AdaLassoConfig cfg;
  cfg.init = oracle::random_matrix(gen, d, 1, 0.5, 1.5).col(0);
  cfg.tol = 1e-12;

  const std::vector<LassoSolution> ends = lambda_path(Y, X, cfg, {1e6, 0.0});
  CHECK(ends[0].beta.isZero(0));
  CHECK((ends[1].beta - oracle::qr_ols(X, Y)).cwiseAbs().maxCoeff() <= 1e-7);

  const std::vector<double> grid = log_grid(5.0, 1e-3, 30);
  const std::vector<LassoSolution> path = lambda_path(Y, X, cfg, grid);
  for (std::size_t j = 1; j < path.size(); ++j) CHECK(path[j].active_set.size() >= path[j - 1].active_set.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    AdaLassoConfig c = cfg;
    c.lambda = grid[j];
    const LassoSolution cold = adaptive_lasso(Y, X, c);
    CHECK((cold.beta - path[j].beta).cwiseAbs().maxCoeff() <= 1e-6);
  }
  CHECK_THROWS_AS(lambda_path(Y, X, cfg, {0.1, 0.5}), DomainError);
}

TEST_CASE("warm and cold starts agree on general designs") {
  std::mt19937_64 gen(11);
  const Problem pr = random_problem(gen, 100, 9, 1.0);
  AdaLassoConfig cfg;
  cfg.init = oracle::qr_ols(pr.X, pr.Y);
  cfg.tol = 1e-12;
  const std::vector<double> grid = log_grid(2.0, 1e-4, 25);
  const auto path = lambda_path(pr.Y, pr.X, cfg, grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    AdaLassoConfig c = cfg;
    c.lambda = grid[j];
    CHECK((adaptive_lasso(pr.Y, pr.X, c).beta - path[j].beta).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("log_grid") {
  const auto g = log_grid(10, 1e-2, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == 10);
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK(g[2] == doctest::Approx(0.1));
  CHECK(log_grid(3, 0.5, 1) == std::vector<double>{3});
  CHECK_THROWS_AS(log_grid(0, 0.5, 4), DomainError);
  CHECK_THROWS_AS(log_grid(1, 0.5, 0), DomainError);
}

TEST_CASE("witness: noiseless data, lambda = 0 gives the truth") {
  std::mt19937_64 gen(12);
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 40, 5);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);
  beta << 2, 0, -1, 0, 0;
  const Eigen::VectorXd Y = X * beta;
  const WitnessResult w = witness_check(X, Y, {0, 2}, 0.0, Eigen::VectorXd::Ones(5), beta);
  CHECK((w.beta_tilde - Eigen::Vector2d(2, -1)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("witness: noiseless data, tiny lambda") {
  std::mt19937_64 gen(13);
  const Eigen::MatrixXd X = oracle::random_matrix(gen, 200, 6);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(6);
  beta << 1.5, 0, -2, 0, 0.8, 0;
  const Eigen::VectorXd Y = X * beta;
  const Eigen::VectorXd init = oracle::qr_ols(X, Y) + 1e-3 * Eigen::VectorXd::Ones(6);
  const double lambda = 1e-4;
  const WitnessResult w = witness_check(X, Y, {0, 2, 4}, lambda, init, beta);
  CHECK(w.condition1);
  CHECK(w.sign_match);
  // beta_tilde = beta_S - lambda G_S^-1 (w s)
  Eigen::MatrixXd XS(200, 3);
  XS << X.col(0), X.col(2), X.col(4);
  const Eigen::Vector3d ws(1.0 / std::abs(init(0)), -1.0 / std::abs(init(2)), 1.0 / std::abs(init(4)));
  const Eigen::VectorXd expect =
      Eigen::Vector3d(1.5, -2, 0.8) - lambda * (XS.transpose() * XS / 200.0).ldlt().solve(ws);
  CHECK((w.beta_tilde - expect).cwiseAbs().maxCoeff() <= 1e-10);
  REQUIRE(w.solver_checked);
  CHECK(w.solver_agrees);
  CHECK(w.solution.active_set == std::vector<int>{0, 2, 4});
}

TEST_CASE("witness success implies solver agreement on random instances") {
  std::mt19937_64 gen(14);
  int successes = 0;
  for (int t = 0; t < 200; ++t) {
    const int d = 3 + static_cast<int>(gen() % 6);
    const Problem pr = random_problem(gen, 60 + 10 * d, d, 0.3);
    std::vector<int> S;
    for (int k = 0; k < d; ++k) {
      if (pr.beta(k) != 0) S.push_back(k);
    }
    const Eigen::VectorXd init = oracle::qr_ols(pr.X, pr.Y);
    const double lambda = 0.01 * (1 + static_cast<int>(gen() % 20));
    const WitnessResult w = witness_check(pr.X, pr.Y, S, lambda, init,
                                          t % 2 ? std::optional<Eigen::VectorXd>(pr.beta) : std::nullopt);
    if (!(w.condition1 && w.sign_match)) continue;
    ++successes;
    REQUIRE(w.solver_checked);
    CHECK(w.solver_agrees);
    CHECK(w.solver_deviation <= 1e-6);
    CHECK(w.solution.active_set == S);
    // independent solve as well
    AdaLassoConfig cfg;
    cfg.lambda = lambda;
    cfg.init = init;
    cfg.tol = 1e-12;
    const LassoSolution s = adaptive_lasso(pr.Y, pr.X, cfg);
    for (std::size_t a = 0; a < S.size(); ++a) {
      CHECK(std::abs(s.beta(S[a]) - w.beta_tilde(static_cast<Eigen::Index>(a))) <= 1e-6);
    }
  }
  CHECK(successes > 50);
}

TEST_CASE("witness rejects a rank-deficient support") {
  std::mt19937_64 gen(15);
  Eigen::MatrixXd X = oracle::random_matrix(gen, 30, 4);
  X.col(1) = X.col(0);
  const Eigen::VectorXd Y = X.col(0);
  CHECK_THROWS_AS(witness_check(X, Y, {0, 1}, 0.1, Eigen::VectorXd::Ones(4)), SingularDesign);
}
