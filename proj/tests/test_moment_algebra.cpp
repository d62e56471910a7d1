#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rcreg/errors.hpp"
#include "rcreg/moment_algebra.hpp"

using namespace rcreg;

namespace {

Eigen::MatrixXd random_symmetric(std::mt19937_64& gen, int p) {
  const Eigen::MatrixXd a = oracle::random_matrix(gen, p, p, -10, 10);
  return (a + a.transpose()) / 2;
}

}  // namespace

TEST_CASE("index map covers the half-vector in order") {
  for (int p = 1; p <= 7; ++p) {
    std::vector<int> seen(static_cast<std::size_t>(half_length(p)), 0);
    for (int i = 0; i < p; ++i) {
      CHECK(half_index(i, i, p) == i);
      for (int j = i; j < p; ++j) {
        const int k = half_index(i, j, p);
        CHECK(half_index(j, i, p) == k);
        CHECK(half_pair(k, p) == std::make_pair(i, j));
        ++seen[static_cast<std::size_t>(k)];
      }
    }
    for (int c : seen) CHECK(c == 1);
    CHECK(dim_from_half_length(half_length(p)) == p);
  }
  // first off-diagonal entries follow the diagonal, then row by row
  CHECK(half_index(0, 1, 3) == 3);
  CHECK(half_index(0, 2, 3) == 4);
  CHECK(half_index(1, 2, 3) == 5);
  CHECK_THROWS_AS(dim_from_half_length(4), DimensionError);
}

TEST_CASE("vec_half examples") {
  CHECK(vec_half(SymMatrix(Eigen::Matrix2d::Identity())).entries() == Eigen::Vector3d(1, 1, 0));
  Eigen::Matrix2d m;
  m << 1, 2, 2, 3;
  CHECK(vec_half(SymMatrix(m)).entries() == Eigen::Vector3d(1, 3, 2));
  Eigen::Matrix3d m3;
  m3 << 11, 4, 5, 4, 22, 6, 5, 6, 33;
  Eigen::VectorXd expect(6);
  expect << 11, 22, 33, 4, 5, 6;
  CHECK(vec_half(SymMatrix(m3)).entries() == expect);
}

TEST_CASE("SymMatrix rejects non-square and asymmetric input") {
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd::Zero(2, 3)), DimensionError);
  Eigen::Matrix2d a;
  a << 1, 2, 2.5, 1;
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd(a)), DomainError);
  CHECK(SymMatrix::symmetrized(a)(0, 1) == 2.25);
}

TEST_CASE("unvec_half examples and round trips") {
  CHECK(unvec_half(Eigen::Vector3d(1, 1, 0), 2).matrix() == Eigen::MatrixXd(Eigen::Matrix2d::Identity()));
  Eigen::Matrix2d m;
  m << 1, 2, 2, 3;
  CHECK(unvec_half(Eigen::Vector3d(1, 3, 2), 2).matrix() == Eigen::MatrixXd(m));
  CHECK_THROWS_AS(unvec_half(Eigen::Vector3d(1, 3, 2), 3), DimensionError);
  CHECK_THROWS_AS(HalfVec(3, Eigen::VectorXd::Zero(5)), DimensionError);

  std::mt19937_64 gen(11);
  for (int t = 0; t < 50; ++t) {
    const SymMatrix s(random_symmetric(gen, 5));
    CHECK(unvec_half(vec_half(s)) == s);
    const HalfVec h(5, oracle::random_matrix(gen, 15, 1).col(0));
    CHECK(vec_half(unvec_half(h)) == h);
  }
}

TEST_CASE("v_transform examples") {
  CHECK(v_transform(Eigen::Vector2d(1, 2)) == Eigen::Vector3d(1, 4, 4));
  Eigen::VectorXd e(6);
  e << 1, 0, 0, 0, 0, 0;
  CHECK(v_transform(Eigen::Vector3d(1, 0, 0)) == e);
  CHECK(v_transform(Eigen::Vector2d(1, -1)) == Eigen::Vector3d(1, 1, -2));
  CHECK_THROWS_AS(v_transform(Eigen::VectorXd()), DimensionError);
}

TEST_CASE("v_transform_rows stacks rows") {
  std::mt19937_64 gen(3);
  const Eigen::MatrixXd x = oracle::random_matrix(gen, 7, 4);
  const Eigen::MatrixXd v = v_transform_rows(x);
  REQUIRE(v.rows() == 7);
  REQUIRE(v.cols() == 10);
  for (int i = 0; i < 7; ++i) CHECK(v.row(i).transpose() == v_transform(x.row(i).transpose()));
}

TEST_CASE("quadratic form identity on random inputs") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> pick(1, 10);
  double worst = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const int p = pick(gen);
    const Eigen::VectorXd x = oracle::random_matrix(gen, p, 1, -10, 10).col(0);
    const SymMatrix m(random_symmetric(gen, p));
    const double lhs = v_transform(x).dot(vec_half(m).entries());
    const double rhs = x.dot(m.matrix() * x);
    const double scale = (x.cwiseAbs() * x.cwiseAbs().transpose()).cwiseProduct(m.matrix().cwiseAbs()).sum();
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(scale, 1e-300));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("min_eigenvalue examples") {
  CHECK(min_eigenvalue(SymMatrix(Eigen::MatrixXd::Identity(3, 3))) == doctest::Approx(1.0).epsilon(1e-14));
  Eigen::Matrix2d d;
  d << 2, 0, 0, -1;
  CHECK(min_eigenvalue(SymMatrix(Eigen::MatrixXd(d))) == doctest::Approx(-1.0).epsilon(1e-14));
  Eigen::Matrix2d r;
  r << 1, -1, -1, 1;
  CHECK(std::abs(min_eigenvalue(SymMatrix(Eigen::MatrixXd(r)))) < 1e-14);
}

TEST_CASE("min_eigenvalue matches a known spectrum at p = 50") {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd q = oracle::random_matrix(gen, 50, 50).householderQr().householderQ();
  Eigen::VectorXd lam = Eigen::VectorXd::LinSpaced(50, 0.25, 30.0);
  const Eigen::MatrixXd m = q * lam.asDiagonal() * q.transpose();
  const double got = min_eigenvalue(SymMatrix::symmetrized(m));
  CHECK(std::abs(got - 0.25) <= 1e-10 * 30.0);
}

TEST_CASE("numeric_rank examples") {
  CHECK(numeric_rank(Eigen::MatrixXd::Identity(4, 4)) == 4);
  CHECK(numeric_rank(Eigen::MatrixXd::Zero(3, 5)) == 0);
  CHECK(numeric_rank(Eigen::MatrixXd::Ones(2, 2)) == 1);
}

TEST_CASE("numeric_rank agrees with a Jacobi SVD on random low-rank matrices") {
  std::mt19937_64 gen(9);
  for (int t = 0; t < 40; ++t) {
    const int rows = 5 + static_cast<int>(gen() % 30);
    const int cols = 2 + static_cast<int>(gen() % 10);
    const int rank = 1 + static_cast<int>(gen() % static_cast<unsigned>(std::min(rows, cols)));
    const Eigen::MatrixXd m = oracle::random_matrix(gen, rows, rank) * oracle::random_matrix(gen, rank, cols);
    CHECK(numeric_rank(m) == rank);
    CHECK(numeric_rank(m) == oracle::svd_rank(m));
  }
}

TEST_CASE("rank of v-transformed points never exceeds p(p+1)/2") {
  std::mt19937_64 gen(17);
  for (int p = 1; p <= 5; ++p) {
    const Eigen::MatrixXd pts = oracle::random_matrix(gen, 60, p);
    CHECK(numeric_rank(v_transform_rows(pts)) == half_length(p));
  }
}
