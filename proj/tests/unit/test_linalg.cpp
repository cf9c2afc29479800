#include <algorithm>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "lodpg/error.hpp"
#include "lodpg/linalg.hpp"

using namespace lodpg;

namespace {

SparseMatrix laplace_1d(int n, double shift = 0.0) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 + shift);
    if (i > 0) t.emplace_back(i, i - 1, -1.0);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1.0);
  }
  SparseMatrix A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

SparseMatrix random_sparse(int rows, int cols, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
  std::vector<Triplet> t;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (p(rng) < density) t.emplace_back(i, j, u(rng));
  SparseMatrix A(rows, cols);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Vector random_vector(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Dense KKT solve restricted to the independent rows of C.
Vector dense_saddle_x(const DenseMatrix& A, const DenseMatrix& C, const Vector& b) {
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(C.transpose());
  const DenseMatrix Q = qr.householderQ();
  const auto r = qr.rank();
  const DenseMatrix N = Q.rightCols(C.cols() - r);
  const DenseMatrix R = N.transpose() * A * N;
  return N * R.llt().solve(N.transpose() * b);
}

}  // namespace

TEST(Restrict, SubmatrixAndColumns) {
  const SparseMatrix A = laplace_1d(6);
  const std::vector<int> dofs{1, 2, 4};
  const DenseMatrix R(restrict_matrix(A, dofs));
  const DenseMatrix D(A);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(R(i, j), D(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)]));
  const std::vector<int> cols{5, 0};
  const DenseMatrix S(select_columns(A, cols));
  EXPECT_EQ(S.col(0), D.col(5));
  EXPECT_EQ(S.col(1), D.col(0));
}

TEST(SpdSolver, MatchesDenseSolve) {
  std::mt19937_64 rng(3);
  const SparseMatrix A = laplace_1d(200, 1e-3);
  const Vector b = random_vector(200, rng);
  const Vector x = solve_spd(A, b);
  const Vector y = DenseMatrix(A).llt().solve(b);
  EXPECT_LT((x - y).norm(), 1e-9 * y.norm());
  SpdSolver s(A);
  DenseMatrix B(200, 3);
  for (int j = 0; j < 3; ++j) B.col(j) = random_vector(200, rng);
  const DenseMatrix X = s.solve(B);
  EXPECT_LT((DenseMatrix(A) * X - B).norm(), 1e-9 * B.norm());
  EXPECT_EQ(s.size(), 200);
}

TEST(SpdSolver, IndefiniteRejected) {
  SparseMatrix A = laplace_1d(5);
  A.coeffRef(2, 2) = -4.0;
  EXPECT_THROW(SpdSolver{A}, SolverError);
}

TEST(LuSolver, NonsymmetricAndSingular) {
  std::mt19937_64 rng(5);
  SparseMatrix A = random_sparse(60, 60, 0.1, rng);
  for (int i = 0; i < 60; ++i) A.coeffRef(i, i) += 4.0;
  const Vector b = random_vector(60, rng);
  const Vector x = LuSolver(A).solve(b);
  EXPECT_LT((A * x - b).norm(), 1e-10 * b.norm());
  SparseMatrix Z(3, 3);
  Z.insert(0, 0) = 1.0;
  Z.insert(1, 1) = 1.0;
  EXPECT_THROW(LuSolver{Z}, SolverError);
}

class SaddleMethods : public ::testing::TestWithParam<SaddleMethod> {};

TEST_P(SaddleMethods, MatchesDenseNullSpaceSolve) {
  std::mt19937_64 rng(17);
  const int n = 80, m = 12;
  const SparseMatrix A = laplace_1d(n, 0.01);
  const SparseMatrix C = random_sparse(m, n, 0.2, rng);
  const Vector b = random_vector(n, rng);
  SaddleSolver s(A, C, kDefaultRtol, GetParam());
  const SaddleSolution sol = s.solve(b);
  const Vector ref = dense_saddle_x(DenseMatrix(A), DenseMatrix(C), b);
  EXPECT_LT((sol.x - ref).norm(), 1e-8 * ref.norm());
  EXPECT_LT((C * sol.x).lpNorm<Eigen::Infinity>(), 1e-10 * sol.x.lpNorm<Eigen::Infinity>());
  EXPECT_LT((A * sol.x + C.transpose() * sol.lambda - b).norm(), 1e-9 * b.norm());
}

TEST_P(SaddleMethods, ZeroAndDependentRows) {
  std::mt19937_64 rng(23);
  const int n = 40;
  const SparseMatrix A = laplace_1d(n, 0.1);
  SparseMatrix C0 = random_sparse(6, n, 0.3, rng);
  DenseMatrix Cd(C0);
  DenseMatrix Cx(9, n);
  Cx.topRows(6) = Cd;
  Cx.row(6).setZero();
  Cx.row(7) = Cd.row(0) + 2.0 * Cd.row(3);
  Cx.row(8).setZero();
  const SparseMatrix C = Cx.sparseView();
  const Vector b = random_vector(n, rng);
  SaddleSolver s(A, C, kDefaultRtol, GetParam());
  const SaddleSolution sol = s.solve(b);
  const auto& dropped = s.dropped_rows();
  EXPECT_NE(std::find(dropped.begin(), dropped.end(), 6), dropped.end());
  EXPECT_NE(std::find(dropped.begin(), dropped.end(), 8), dropped.end());
  EXPECT_EQ(sol.lambda.size(), 9);
  const Vector ref = dense_saddle_x(DenseMatrix(A), Cx, b);
  EXPECT_LT((sol.x - ref).norm(), 1e-8 * ref.norm());
  EXPECT_LT((A * sol.x + C.transpose() * sol.lambda - b).norm(), 1e-9 * b.norm());
}

INSTANTIATE_TEST_SUITE_P(Both, SaddleMethods, ::testing::Values(SaddleMethod::Schur, SaddleMethod::Kkt));

TEST(Saddle, SchurDropsDependentRows) {
  std::mt19937_64 rng(29);
  const int n = 30;
  const SparseMatrix A = laplace_1d(n, 0.1);
  DenseMatrix Cx = DenseMatrix(random_sparse(4, n, 0.4, rng));
  Cx.conservativeResize(5, n);
  Cx.row(4) = 3.0 * Cx.row(1);
  SaddleSolver s(A, SparseMatrix(Cx.sparseView()));
  EXPECT_EQ(s.num_active_rows(), 4);
  EXPECT_EQ(s.method(), SaddleMethod::Schur);
}

TEST(Saddle, EmptyConstraintIsPlainSolve) {
  std::mt19937_64 rng(31);
  const SparseMatrix A = laplace_1d(20, 0.5);
  const Vector b = random_vector(20, rng);
  const SaddleSolution sol = solve_saddle(A, SparseMatrix(0, 20), b);
  EXPECT_LT((A * sol.x - b).norm(), 1e-10 * b.norm());
}

TEST(Eig, RealPartsOfKnownSpectrum) {
  // companion-like block with eigenvalues 2 +- 3i and a 2x2 block with 1, 5
  DenseMatrix S = DenseMatrix::Zero(4, 4);
  S(0, 0) = 2.0;
  S(0, 1) = -3.0;
  S(1, 0) = 3.0;
  S(1, 1) = 2.0;
  S(2, 2) = 3.0;
  S(2, 3) = 2.0;
  S(3, 2) = 2.0;
  S(3, 3) = 3.0;
  std::mt19937_64 rng(1);
  DenseMatrix V = DenseMatrix::Identity(4, 4);
  for (int i = 0; i < 4; ++i) V.col(i) += 0.3 * random_vector(4, rng);
  const DenseMatrix T = V * S * V.inverse();
  const auto re = eig_real_parts(T);
  ASSERT_EQ(re.size(), 4u);
  EXPECT_NEAR(re[0], 1.0, 1e-10);
  EXPECT_NEAR(re[1], 2.0, 1e-10);
  EXPECT_NEAR(re[2], 2.0, 1e-10);
  EXPECT_NEAR(re[3], 5.0, 1e-10);
}
