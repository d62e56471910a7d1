#include "rcreg/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>

#include "rcreg/errors.hpp"
#include "rcreg/estimation.hpp"

namespace rcreg {

namespace {

constexpr std::uint64_t kCovariateStream = 0;
constexpr std::uint64_t kCoefficientStream = 1;

std::uint64_t stream_id(Phase phase, std::uint64_t which) { return 2 * static_cast<std::uint64_t>(phase) + which; }

template <class F>
void parallel_for(int count, int threads, F&& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

int sign_of(double x) { return (x > 0) - (x < 0); }

}  // namespace

const char* to_string(CovariateLaw law) {
  return law == CovariateLaw::UniformInterval ? "UNIFORM_INTERVAL" : "UNIFORM_THREE_POINT";
}

CovariateLaw covariate_law_from_string(const std::string& s) {
  if (s == "UNIFORM_INTERVAL") return CovariateLaw::UniformInterval;
  if (s == "UNIFORM_THREE_POINT") return CovariateLaw::UniformThreePoint;
  throw DomainError("unknown covariate law: " + s);
}

GaussianCoefficients::GaussianCoefficients(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) : mean_(std::move(mean)) {
  const auto p = mean_.size();
  if (cov.rows() != p || cov.cols() != p) throw DimensionError("covariance does not match the mean");
  if (!cov.allFinite() || !mean_.allFinite()) throw DomainError("non-finite coefficient law");
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 0) throw DomainError("covariance is not symmetric");
  if (p == 0) return;

  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success) throw DomainError("Cholesky factorization of the covariance failed");
  const Eigen::VectorXd D = ldlt.vectorD();
  Eigen::VectorXd root(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    if (D(k) < -1e-10 * scale) throw DomainError("covariance is not positive semidefinite");
    root(k) = D(k) > 1e-14 * scale ? std::sqrt(D(k)) : 0.0;
  }
  const Eigen::MatrixXd L = ldlt.matrixL();
  factor_ = ldlt.transpositionsP().transpose() * (L * root.asDiagonal());
  if ((factor_ * factor_.transpose() - cov).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw DomainError("covariance is not positive semidefinite");
  }
  // Pivoting orders D by magnitude, so the nonzero columns come first.
  rank_ = 0;
  for (Eigen::Index k = 0; k < p; ++k) {
    if (root(k) != 0.0) rank_ = static_cast<int>(k) + 1;
  }
}

void GaussianCoefficients::draw(StreamRng& rng, Eigen::Ref<Eigen::VectorXd> out) const {
  out = mean_;
  for (int k = 0; k < rank_; ++k) out += factor_.col(k) * rng.normal();
}

void draw_covariate(CovariateLaw law, StreamRng& rng, Eigen::Ref<Eigen::VectorXd> w) {
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (law == CovariateLaw::UniformInterval) {
      w(j) = rng.uniform(-1.0, 1.0);
    } else {
      w(j) = static_cast<double>(rng.below(3)) - 1.0;
    }
  }
}

Dataset sample_dataset(const GaussianCoefficients& coefficients, CovariateLaw law, int n, StreamRng& coef_rng,
                       StreamRng& covariate_rng) {
  const int p = coefficients.dim();
  if (p < 1) throw DimensionError("need at least the intercept");
  if (n < p) throw DimensionError("need n >= p");
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd Y(n);
  Eigen::VectorXd a(p);
  Eigen::VectorXd w(p - 1);
  for (int i = 0; i < n; ++i) {
    draw_covariate(law, covariate_rng, w);
    coefficients.draw(coef_rng, a);
    X(i, 0) = 1.0;
    X.row(i).tail(p - 1) = w.transpose();
    Y(i) = X.row(i).dot(a);
  }
  return Dataset(std::move(X), std::move(Y));
}

Dataset sample_dataset(const GaussianCoefficients& coefficients, CovariateLaw law, int n, std::uint64_t seed,
                       std::uint64_t rep_index, Phase phase) {
  StreamRng covariate_rng(seed, rep_index, stream_id(phase, kCovariateStream));
  StreamRng coef_rng(seed, rep_index, stream_id(phase, kCoefficientStream));
  return sample_dataset(coefficients, law, n, coef_rng, covariate_rng);
}

Eigen::Matrix4d SimConfig::default_sigma1() {
  Eigen::Matrix4d s;
  s << 10.0, 15.65, -5.20, 0.0,
       15.65, 50.0, 0.0, 12.65,
       -5.20, 0.0, 30.0, -12.25,
       0.0, 12.65, -12.25, 20.0;
  return s;
}

void SimConfig::validate() const {
  if (p < 5) throw DomainError("p must be at least 5");
  if (n < 1) throw DomainError("n must be positive");
  if (replications < 1) throw DomainError("replications must be at least 1");
  if (pilot_replications < 1) throw DomainError("pilot_replications must be at least 1");
  if (grid_size < 1) throw DomainError("grid_size must be positive");
  if (!(grid_min_ratio > 0) || !(grid_min_ratio <= 1)) throw DomainError("grid_min_ratio must lie in (0, 1]");
  if (lambda && !(*lambda >= 0 && std::isfinite(*lambda))) throw DomainError("lambda must be finite and >= 0");
  for (double l : lambda_grid) {
    if (!(l >= 0 && std::isfinite(l))) throw DomainError("lambda_grid entries must be finite and >= 0");
  }
  if (!std::isfinite(b4) || !mu1.allFinite()) throw DomainError("non-finite coefficient means");
  GaussianCoefficients check(mu1, Sigma1);
  (void)check;
}

Eigen::VectorXd true_mean(const SimConfig& cfg) {
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(cfg.p);
  mu.head(4) = cfg.mu1;
  mu(4) = cfg.b4;
  return mu;
}

SymMatrix true_covariance(const SimConfig& cfg) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(cfg.p, cfg.p);
  s.topLeftCorner(4, 4) = cfg.Sigma1;
  return SymMatrix(s);
}

HalfVec true_sigma(const SimConfig& cfg) { return vec_half(true_covariance(cfg)); }

GaussianCoefficients coefficient_law(const SimConfig& cfg) {
  return GaussianCoefficients(true_mean(cfg), true_covariance(cfg).matrix());
}

std::vector<bool> penalized_coordinates(const SimConfig& cfg) {
  std::vector<bool> mask(static_cast<std::size_t>(half_length(cfg.p)), true);
  mask[0] = cfg.penalize_intercept_variance;
  return mask;
}

Dataset dgp_sample(const SimConfig& cfg, int rep_index, Phase phase) {
  cfg.validate();
  return sample_dataset(coefficient_law(cfg), cfg.covariate_law, cfg.n, cfg.seed,
                        static_cast<std::uint64_t>(rep_index), phase);
}

ReplicationResult run_replication(const SimConfig& cfg, int rep_index, double lambda) {
  ReplicationResult r;
  r.rep = rep_index;
  try {
    const Dataset data = dgp_sample(cfg, rep_index, Phase::Main);
    const MomentFit fit = fit_moments(data, lambda, cfg.penalize_intercept_variance);
    const Eigen::VectorXd truth = true_sigma(cfg).entries();
    const Eigen::VectorXd& est = fit.sigma_hat.entries();
    const std::vector<bool> pen = penalized_coordinates(cfg);
    r.signs.resize(static_cast<std::size_t>(est.size()));
    r.sign_ok = true;
    r.superset = true;
    for (Eigen::Index k = 0; k < est.size(); ++k) {
      const int s = sign_of(est(k));
      r.signs[static_cast<std::size_t>(k)] = s;
      if (s != sign_of(truth(k))) r.sign_ok = false;
      if (truth(k) != 0 && est(k) == 0) r.superset = false;
      if (!pen[static_cast<std::size_t>(k)]) continue;
      if (truth(k) == 0 && est(k) != 0) ++r.fp;
      if (truth(k) != 0 && est(k) == 0) ++r.fn;
    }
    r.psd = fit.psd;
  } catch (const std::exception& e) {
    r = ReplicationResult{};
    r.rep = rep_index;
    r.failed = true;
    r.error = e.what();
  }
  return r;
}

TuneResult tune_lambda(const SimConfig& cfg) {
  cfg.validate();
  TuneResult out;
  const Eigen::VectorXd truth = true_sigma(cfg).entries();
  const std::vector<bool> pen = penalized_coordinates(cfg);
  for (Eigen::Index k = 0; k < truth.size(); ++k) {
    if (pen[static_cast<std::size_t>(k)] && truth(k) != 0) ++out.target_df;
  }

  const int m = cfg.pilot_replications;
  const int threads = resolve_threads(cfg.threads);
  std::vector<std::optional<MomentProblem>> problems(static_cast<std::size_t>(m));
  std::vector<double> lmax(static_cast<std::size_t>(m), 0.0);
  parallel_for(m, threads, [&](int i) {
    try {
      const Dataset data = dgp_sample(cfg, i, Phase::Pilot);
      MomentProblem prob = prepare_moment_problem(data, cfg.penalize_intercept_variance);
      lmax[static_cast<std::size_t>(i)] = prob.lasso.lambda_max(prob.config(0.0));
      problems[static_cast<std::size_t>(i)] = std::move(prob);
    } catch (const std::exception&) {
      problems[static_cast<std::size_t>(i)].reset();
    }
  });

  if (!cfg.lambda_grid.empty()) {
    out.grid = cfg.lambda_grid;
    std::sort(out.grid.begin(), out.grid.end(), std::greater<>());
  } else {
    double hi = 0.0;
    for (double l : lmax) hi = std::max(hi, l);
    if (!(hi > 0) || !std::isfinite(hi)) hi = 1.0;
    out.grid = log_grid(hi, cfg.grid_min_ratio, cfg.grid_size);
  }

  const auto g = out.grid.size();
  std::vector<std::vector<char>> df_ok(static_cast<std::size_t>(m), std::vector<char>(g, 0));
  std::vector<std::vector<char>> sign_ok(static_cast<std::size_t>(m), std::vector<char>(g, 0));
  parallel_for(m, threads, [&](int i) {
    const auto& prob = problems[static_cast<std::size_t>(i)];
    if (!prob) return;
    const std::vector<LassoSolution> path = lambda_path(prob->lasso, prob->config(0.0), out.grid);
    for (std::size_t j = 0; j < g; ++j) {
      const Eigen::VectorXd& b = path[j].beta;
      int df = 0;
      bool signs = true;
      for (Eigen::Index k = 0; k < b.size(); ++k) {
        if (pen[static_cast<std::size_t>(k)] && b(k) != 0) ++df;
        if (sign_of(b(k)) != sign_of(truth(k))) signs = false;
      }
      df_ok[static_cast<std::size_t>(i)][j] = df == out.target_df;
      sign_ok[static_cast<std::size_t>(i)][j] = signs;
    }
  });

  out.df_hits.assign(g, 0);
  out.sign_hits.assign(g, 0);
  for (int i = 0; i < m; ++i) {
    if (!problems[static_cast<std::size_t>(i)]) {
      ++out.pilot_failures;
      continue;
    }
    for (std::size_t j = 0; j < g; ++j) {
      out.df_hits[j] += df_ok[static_cast<std::size_t>(i)][j];
      out.sign_hits[j] += sign_ok[static_cast<std::size_t>(i)][j];
    }
  }

  // Grid is descending, so the first maximum is the largest lambda.
  std::size_t best = 0;
  for (std::size_t j = 1; j < g; ++j) {
    if (out.df_hits[j] > out.df_hits[best]) best = j;
  }
  if (out.df_hits[best] == 0) {
    out.fallback = true;
    best = g / 2;
  }
  out.lambda = out.grid[best];
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RCREG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

SimReport aggregate(std::vector<ReplicationResult> results, double lambda, bool keep_per_rep) {
  std::sort(results.begin(), results.end(),
            [](const ReplicationResult& a, const ReplicationResult& b) { return a.rep < b.rep; });
  SimReport rep;
  rep.lambda_used = lambda;
  rep.replications = static_cast<int>(results.size());
  auto bump = [](std::vector<int>& h, int idx) {
    if (h.size() <= static_cast<std::size_t>(idx)) h.resize(static_cast<std::size_t>(idx) + 1, 0);
    ++h[static_cast<std::size_t>(idx)];
  };
  for (const auto& r : results) {
    if (r.failed) {
      ++rep.failures;
      continue;
    }
    bump(rep.fp_histogram, r.fp);
    bump(rep.fn_histogram, r.fn);
    if (r.sign_ok) {
      ++rep.successes;
      if (r.psd) ++rep.psd_among_success;
    }
    if (r.fn == 0 && !r.superset) ++rep.superset_violations;
  }
  rep.sign_recovery_rate = rep.replications > 0 ? static_cast<double>(rep.successes) / rep.replications : 0.0;
  if (keep_per_rep) rep.per_rep = std::move(results);
  return rep;
}

SimReport monte_carlo(const SimConfig& cfg) {
  cfg.validate();
  double lambda = 0.0;
  TuneResult tune;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
  } else {
    tune = tune_lambda(cfg);
    lambda = tune.lambda;
  }
  std::vector<ReplicationResult> results(static_cast<std::size_t>(cfg.replications));
  parallel_for(cfg.replications, resolve_threads(cfg.threads),
               [&](int i) { results[static_cast<std::size_t>(i)] = run_replication(cfg, i, lambda); });
  SimReport rep = aggregate(std::move(results), lambda, cfg.keep_per_rep);
  rep.lambda_tuned = !cfg.lambda;
  rep.tuning_fallback = tune.fallback;
  return rep;
}

}  // namespace rcreg
