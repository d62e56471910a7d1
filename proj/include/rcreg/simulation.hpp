#pragma once

// Monte Carlo study of sign recovery for the covariance half-vector.
//
// DGP: (B0..B3) ~ N4(mu1, Sigma1), B4 = b4, B5..B(p-1) = 0, covariates iid
// U[-1, 1] or U{-1, 0, 1}, Y_i = X_i' A_i. Every replication draws from its
// own (seed, replication, stream) generators.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcreg/dataset.hpp"
#include "rcreg/moment_algebra.hpp"
#include "rcreg/rng.hpp"

namespace rcreg {

enum class CovariateLaw { UniformInterval, UniformThreePoint };

const char* to_string(CovariateLaw law);
CovariateLaw covariate_law_from_string(const std::string& s);

/// Main replications and tuning pilots use disjoint random streams.
enum class Phase : std::uint64_t { Main = 0, Pilot = 1 };

/// N(mean, cov) via a pivoted LDL' (Cholesky) factor; cov may be singular PSD.
class GaussianCoefficients {
 public:
  /// Throws DomainError unless cov is symmetric PSD.
  GaussianCoefficients(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& factor() const { return factor_; }

  void draw(StreamRng& rng, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd factor_;  // factor * factor' == cov
  int rank_ = 0;            // leading columns of factor that are nonzero
};

void draw_covariate(CovariateLaw law, StreamRng& rng, Eigen::Ref<Eigen::VectorXd> w);

/// n draws of Y = X'A with A from `coefficients` and W from `law`.
Dataset sample_dataset(const GaussianCoefficients& coefficients, CovariateLaw law, int n, StreamRng& coef_rng,
                       StreamRng& covariate_rng);

/// Sample keyed by (seed, rep_index, phase) for an arbitrary Gaussian law.
Dataset sample_dataset(const GaussianCoefficients& coefficients, CovariateLaw law, int n, std::uint64_t seed,
                       std::uint64_t rep_index, Phase phase = Phase::Main);

struct SimConfig {
  int n = 5000;
  int p = 6;
  CovariateLaw covariate_law = CovariateLaw::UniformInterval;
  Eigen::Vector4d mu1{40.0, 15.0, 0.0, -10.0};
  Eigen::Matrix4d Sigma1 = default_sigma1();
  double b4 = 20.0;
  std::optional<double> lambda;  // empty: tune
  int replications = 200;
  std::uint64_t seed = 1;
  int pilot_replications = 100;
  int grid_size = 50;
  double grid_min_ratio = 1e-4;
  std::vector<double> lambda_grid;  // explicit tuning grid; overrides grid_size
  bool penalize_intercept_variance = false;
  int threads = 0;  // 0: RCREG_THREADS, else hardware concurrency
  bool keep_per_rep = true;

  static Eigen::Matrix4d default_sigma1();

  /// Throws DomainError on p < 5, replications < 1, or a Sigma1 that is not PSD.
  void validate() const;
};

Eigen::VectorXd true_mean(const SimConfig& cfg);
SymMatrix true_covariance(const SimConfig& cfg);
HalfVec true_sigma(const SimConfig& cfg);
GaussianCoefficients coefficient_law(const SimConfig& cfg);

/// Mask of half-vector coordinates subject to the penalty.
std::vector<bool> penalized_coordinates(const SimConfig& cfg);

Dataset dgp_sample(const SimConfig& cfg, int rep_index, Phase phase = Phase::Main);

struct ReplicationResult {
  int rep = 0;
  bool failed = false;
  std::string error;
  bool sign_ok = false;
  int fp = 0;  // penalized zeros estimated nonzero
  int fn = 0;  // penalized nonzeros estimated zero
  bool psd = false;
  bool superset = false;  // estimated support contains the true support
  std::vector<int> signs;
};

ReplicationResult run_replication(const SimConfig& cfg, int rep_index, double lambda);

struct TuneResult {
  double lambda = 0.0;
  bool fallback = false;  // no grid value reached the target degrees of freedom
  int target_df = 0;      // penalized coordinates in the true support
  std::vector<double> grid;
  std::vector<int> df_hits;    // pilots with exactly target_df penalized actives
  std::vector<int> sign_hits;  // pilots with full sign recovery
  int pilot_failures = 0;
};

/// Most frequent lambda achieving the true number of penalized nonzeros over
/// the pilot replications; ties go to the larger lambda.
TuneResult tune_lambda(const SimConfig& cfg);

struct SimReport {
  double lambda_used = 0.0;
  bool lambda_tuned = false;
  bool tuning_fallback = false;
  int replications = 0;
  int failures = 0;
  int successes = 0;  // full sign recovery
  double sign_recovery_rate = 0.0;
  std::vector<int> fp_histogram;
  std::vector<int> fn_histogram;
  int psd_among_success = 0;
  int superset_violations = 0;  // FN == 0 but the true support is not covered
  std::vector<ReplicationResult> per_rep;
};

/// Number of worker threads: requested if > 0, else RCREG_THREADS, else the
/// hardware concurrency.
int resolve_threads(int requested);

SimReport aggregate(std::vector<ReplicationResult> results, double lambda, bool keep_per_rep);

SimReport monte_carlo(const SimConfig& cfg);

}  // namespace rcreg
