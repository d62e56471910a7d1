#pragma once

// Symmetric matrices, their half-vectorization and the quadratic-form design
// transform v. Half-vectors are ordered diagonal first, then the strict upper
// triangle row by row:
//
//   vec(M) = (M11, ..., Mpp, M12, ..., M1p, M23, ..., M2p, ..., M(p-1)p)
//   v(x)   = (x1^2, ..., xp^2, 2x1x2, ..., 2x1xp, 2x2x3, ..., 2x(p-1)xp)
//
// so that v(x) . vec(M) == x' M x.

#include <Eigen/Dense>

#include <utility>

namespace rcreg {

/// Length p(p+1)/2 of a half-vector of a p x p symmetric matrix.
constexpr int half_length(int p) { return p * (p + 1) / 2; }

/// Inverse of half_length; throws DimensionError if `len` is not triangular.
int dim_from_half_length(int len);

/// Position of entry (i, j) (0-based, either order) inside vec(M).
int half_index(int i, int j, int p);

/// Matrix entry (i, j), i <= j, stored at half-vector position k.
std::pair<int, int> half_pair(int k, int p);

class SymMatrix {
 public:
  SymMatrix() = default;
  /// Throws DimensionError when not square, DomainError when not exactly symmetric.
  explicit SymMatrix(Eigen::MatrixXd m);

  /// (M + M') / 2, for callers holding a numerically symmetric matrix.
  static SymMatrix symmetrized(const Eigen::MatrixXd& m);
  static SymMatrix zero(int p) { return SymMatrix(Eigen::MatrixXd::Zero(p, p)); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Eigen::MatrixXd m_;
};

class HalfVec {
 public:
  HalfVec() = default;
  /// Throws DimensionError unless entries.size() == p(p+1)/2.
  HalfVec(int p, Eigen::VectorXd entries);

  int dim() const { return p_; }
  int size() const { return static_cast<int>(entries_.size()); }
  const Eigen::VectorXd& entries() const { return entries_; }
  double operator()(int k) const { return entries_(k); }

  friend bool operator==(const HalfVec& a, const HalfVec& b) {
    return a.p_ == b.p_ && a.entries_ == b.entries_;
  }

 private:
  int p_ = 0;
  Eigen::VectorXd entries_;
};

HalfVec vec_half(const SymMatrix& m);
SymMatrix unvec_half(const Eigen::VectorXd& s, int p);
SymMatrix unvec_half(const HalfVec& s);

/// Row v(x) of the second-stage design. Throws DimensionError on empty x.
Eigen::VectorXd v_transform(const Eigen::Ref<const Eigen::VectorXd>& x);

/// Writes v(x) into `out` (size p(p+1)/2) without allocating.
void v_transform_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                      Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out);

/// Stacks v(x_i) for the rows x_i of `rows`.
Eigen::MatrixXd v_transform_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows);

double min_eigenvalue(const SymMatrix& m);
/// Reads only the lower triangle of `m`.
double min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Singular values in decreasing order. Tall inputs are first reduced to
/// their triangular QR factor, which has the same singular values.
Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Number of singular values above tol * (largest singular value).
int numeric_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol = 1e-10);

}  // namespace rcreg
