#include "rcreg/moment_algebra.hpp"

#include <cmath>
#include <string>

#include "rcreg/errors.hpp"

namespace rcreg {

int dim_from_half_length(int len) {
  if (len < 1) throw DimensionError("half-vector must be non-empty");
  int p = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  if (half_length(p) != len) {
    throw DimensionError("length " + std::to_string(len) + " is not p(p+1)/2 for any p");
  }
  return p;
}

int half_index(int i, int j, int p) {
  if (i < 0 || j < 0 || i >= p || j >= p) throw DimensionError("half_index out of range");
  if (i == j) return i;
  if (i > j) std::swap(i, j);
  // Rows 0..i-1 of the strict upper triangle hold (p-1) + (p-2) + ... entries.
  return p + i * (p - 1) - i * (i - 1) / 2 + (j - i - 1);
}

std::pair<int, int> half_pair(int k, int p) {
  if (k < 0 || k >= half_length(p)) throw DimensionError("half_pair out of range");
  if (k < p) return {k, k};
  int off = k - p;
  int i = 0;
  while (off >= p - 1 - i) {
    off -= p - 1 - i;
    ++i;
  }
  return {i, i + 1 + off};
}

SymMatrix::SymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw DimensionError("symmetric matrix must be square, got " + std::to_string(m_.rows()) +
                         "x" + std::to_string(m_.cols()));
  }
  if (m_ != m_.transpose()) throw DomainError("matrix is not symmetric");
}

SymMatrix SymMatrix::symmetrized(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("symmetric matrix must be square");
  Eigen::MatrixXd s = 0.5 * (m + m.transpose());
  return SymMatrix(std::move(s));
}

HalfVec::HalfVec(int p, Eigen::VectorXd entries) : p_(p), entries_(std::move(entries)) {
  if (p < 1 || entries_.size() != half_length(p)) {
    throw DimensionError("half-vector of a " + std::to_string(p) + "x" + std::to_string(p) +
                         " matrix needs " + std::to_string(half_length(p)) + " entries, got " +
                         std::to_string(entries_.size()));
  }
}

HalfVec vec_half(const SymMatrix& m) {
  const int p = m.dim();
  Eigen::VectorXd s(half_length(p));
  for (int i = 0; i < p; ++i) s(i) = m(i, i);
  int k = p;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) s(k++) = m(i, j);
  }
  return HalfVec(p, std::move(s));
}

SymMatrix unvec_half(const Eigen::VectorXd& s, int p) {
  if (p < 1 || s.size() != half_length(p)) {
    throw DimensionError("unvec_half: length " + std::to_string(s.size()) +
                         " does not match p=" + std::to_string(p));
  }
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i) m(i, i) = s(i);
  int k = p;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      m(i, j) = s(k);
      m(j, i) = s(k);
      ++k;
    }
  }
  return SymMatrix(std::move(m));
}

SymMatrix unvec_half(const HalfVec& s) { return unvec_half(s.entries(), s.dim()); }

void v_transform_into(const Eigen::Ref<const Eigen::VectorXd>& x,
                      Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) {
  const int p = static_cast<int>(x.size());
  if (p < 1) throw DimensionError("v_transform of an empty vector");
  if (out.size() != half_length(p)) throw DimensionError("v_transform output has wrong length");
  for (int i = 0; i < p; ++i) out(i) = x(i) * x(i);
  int k = p;
  for (int i = 0; i < p; ++i) {
    const double xi2 = 2.0 * x(i);
    for (int j = i + 1; j < p; ++j) out(k++) = xi2 * x(j);
  }
}

Eigen::VectorXd v_transform(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() < 1) throw DimensionError("v_transform of an empty vector");
  Eigen::RowVectorXd row(half_length(static_cast<int>(x.size())));
  v_transform_into(x, row);
  return row.transpose();
}

Eigen::MatrixXd v_transform_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
  const int p = static_cast<int>(rows.cols());
  if (p < 1) throw DimensionError("v_transform_rows needs at least one column");
  Eigen::MatrixXd out(rows.rows(), half_length(p));
  // Column-wise fill keeps memory access contiguous for column-major storage.
  for (int i = 0; i < p; ++i) out.col(i) = rows.col(i).array().square().matrix();
  int k = p;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      out.col(k++) = (2.0 * rows.col(i).array() * rows.col(j).array()).matrix();
    }
  }
  return out;
}

double min_eigenvalue(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() != m.cols()) throw DimensionError("min_eigenvalue needs a square matrix");
  if (m.rows() == 0) throw DimensionError("min_eigenvalue of an empty matrix");
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double min_eigenvalue(const SymMatrix& m) { return min_eigenvalue(m.matrix()); }

Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  if (m.rows() > 2 * m.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
    return Eigen::BDCSVD<Eigen::MatrixXd>(r).singularValues();
  }
  if (m.cols() > 2 * m.rows()) return singular_values(m.transpose());
  return Eigen::BDCSVD<Eigen::MatrixXd>(m).singularValues();
}

int numeric_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol) {
  if (!(tol > 0)) throw DomainError("numeric_rank tolerance must be positive");
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = tol * sv(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++r;
  }
  return r;
}

}  // namespace rcreg
