#pragma once

// Identification of the coefficient means and covariance matrix from the
// support of the covariates, and sharp bounds for Var(B1) when a single binary
// regressor Z breaks identification in  Y = B0 + Z B1 + W' B2.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace rcreg {

using CovariatePoint = Eigen::VectorXd;

/// Finite support of each covariate W_1..W_{p-1} (the intercept is implicit).
class SupportSpec {
 public:
  /// Sorts each coordinate. Throws DomainError naming the 1-based coordinate
  /// when a coordinate is empty, has a repeated point or a non-finite value.
  explicit SupportSpec(std::vector<std::vector<double>> supports);

  int num_covariates() const { return static_cast<int>(supports_.size()); }
  int p() const { return num_covariates() + 1; }
  const std::vector<double>& points(int coord) const { return supports_.at(coord); }
  const std::vector<std::vector<double>>& supports() const { return supports_; }

  /// Number of points of the Cartesian product, saturating at SIZE_MAX.
  std::size_t product_size() const;

 private:
  std::vector<std::vector<double>> supports_;
};

struct IdentReport {
  int full_dim = 0;
  int achieved_rank = 0;
  bool identified = false;
  std::vector<CovariatePoint> witness_points;
  std::vector<int> deficient_coordinates;  // 1-based, coordinates with < 3 points
};

/// Rows v((1, w')') for each point w. Throws DimensionError on an empty list
/// or points of different dimensions.
Eigen::MatrixXd build_design_S(const std::vector<CovariatePoint>& points);

/// p(p+1)/2 points of the product of the first three support points of each
/// coordinate whose design matrix has full rank. Throws NotIdentifiable when
/// some coordinate has fewer than three points.
std::vector<CovariatePoint> cartesian_identifying_points(const SupportSpec& spec);

struct IdentOptions {
  double rank_tol = 1e-10;
  std::size_t product_cap = 1'000'000;
};

/// Full-rank construction when every coordinate has three points; otherwise the
/// rank of S over the whole Cartesian product (ExplosionError above the cap).
/// In the deficient case the witness points are a maximal set of product points
/// with linearly independent design rows.
IdentReport check_identified(const SupportSpec& spec, const IdentOptions& opts = {});

enum class Randomness { ForcedZero, ForcedPositive, Interval };

const char* to_string(Randomness r);
Randomness randomness_from_string(const std::string& s);

struct VarianceBounds {
  double lower = 0.0;
  double upper = 0.0;
  Randomness classification = Randomness::Interval;
};

/// Bounds on the standard deviation of B1 for a binary regressor on {0, 1},
/// given s1 = sd(B0) and s2 = sd(B0 + B1).
VarianceBounds binary_variance_interval(double s1, double s2);

/// Cor(B0, B1) that makes sd(B1) = u consistent with s1 = sd(B0), s2 = sd(B0 + B1).
double correlation_for_variance(double s1, double s2, double u);

struct MixedMoments {
  Eigen::VectorXd moments;  // E[B0^(n-k) B1^k], k = 0..n
  double relative_residual = 0.0;
};

/// Solves E[Y^n | W1 = w_j] = sum_k C(n,k) w_j^k E[B0^(n-k) B1^k] over n+1
/// distinct support points. Throws SingularSystem on repeated points.
MixedMoments mixed_moments_single_regressor(const std::vector<double>& support,
                                            const std::vector<double>& cond_moments, int order);

/// Identified pieces of Cov((B0, B1, B2')') under a binary Z and product support.
struct PartialIdBlocks {
  Eigen::MatrixXd cov_b0_b2;  // (p-1) x (p-1), order (B0, B2)
  Eigen::VectorXd cov_b1_b2;  // p-2
  double var_b0_plus_b1 = 0.0;

  int p() const { return static_cast<int>(cov_b0_b2.rows()) + 1; }

  /// Throws DimensionError / DomainError (with the minimum eigenvalue) when the
  /// blocks are malformed or Cov((B0, B2')') is not PSD.
  void validate() const;

  /// Full p x p covariance with Var(B1) = s and Cov(B0, B1) pinned by
  /// Var(B0 + B1) = Var(B0) + s + 2 Cov(B0, B1).
  Eigen::MatrixXd assemble(double s) const;
};

/// Sharp bounds for Var(B1) over PSD completions. The feasible set in s is an
/// interval; both ends are located by bisection to absolute precision `tol`
/// with "min eigenvalue >= -tol" as the feasibility test. Throws
/// InfeasibleError when no s is feasible.
VarianceBounds partial_id_bounds(const PartialIdBlocks& blocks, double tol = 1e-9);

/// Decides whether B1 must be random, must be constant, or is undetermined,
/// using the identified blocks directly; bounds are attached.
VarianceBounds classify_randomness(const PartialIdBlocks& blocks, double tol = 1e-9);

}  // namespace rcreg
