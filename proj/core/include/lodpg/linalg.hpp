#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace lodpg {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using Triplet = Eigen::Triplet<double, int>;

inline constexpr double kDefaultRtol = 1e-10;

/// Principal submatrix A(dofs, dofs). `dofs` must be sorted ascending.
SparseMatrix restrict_matrix(const SparseMatrix& A, std::span<const int> dofs);
/// Columns `cols` of A (kept in the given order).
SparseMatrix select_columns(const SparseMatrix& A, std::span<const int> cols);

/// Sparse Cholesky factorization (AMD ordering) of an SPD matrix. Solves are post-checked
/// against the residual contract and refined when needed.
class SpdSolver {
public:
  explicit SpdSolver(const SparseMatrix& A, double rtol = kDefaultRtol);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Vector solve(const Vector& b) const;
  /// Multi right-hand side solve without the per-column residual check.
  DenseMatrix solve(const DenseMatrix& B) const;
  int size() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Solve A x = b for SPD A with relative residual <= rtol.
/// Throws SolverError on breakdown or when the contract cannot be met.
Vector solve_spd(const SparseMatrix& A, const Vector& b, double rtol = kDefaultRtol);

/// Sparse LU for square nonsymmetric systems. Throws SolverError when the
/// matrix is numerically singular.
class LuSolver {
public:
  explicit LuSolver(const SparseMatrix& A, double rtol = kDefaultRtol);
  ~LuSolver();
  LuSolver(LuSolver&&) noexcept;
  LuSolver& operator=(LuSolver&&) noexcept;
  Vector solve(const Vector& b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SaddleSolution {
  Vector x;
  /// Multipliers, one per row of C (zero for dropped rows).
  Vector lambda;
};

enum class SaddleMethod {
  Schur,  ///< A^-1 C^T with a pivoted dense factorization of C A^-1 C^T
  Kkt,    ///< sparse LU of [A C^T; C 0], Schur complement as fallback
};

/// Solver for  [A C^T; C 0] [x; lambda] = [b; 0]  with A SPD on ker C.
/// Rows of C that are identically zero are dropped up front. The Schur
/// route also drops rows that are linearly dependent on the others. Every
/// solve is checked against  ||A x + C^T lambda - b|| <= rtol ||b||  and
///  ||C x||_inf <= rtol ||x||_inf.
class SaddleSolver {
public:
  SaddleSolver(const SparseMatrix& A, const SparseMatrix& C, double rtol = kDefaultRtol,
               SaddleMethod method = SaddleMethod::Schur);
  ~SaddleSolver();
  SaddleSolver(SaddleSolver&&) noexcept;
  SaddleSolver& operator=(SaddleSolver&&) noexcept;

  /// Not const: a KKT solve that misses the contract switches the solver to
  /// the Schur route for this and all later solves.
  SaddleSolution solve(const Vector& b);
  const std::vector<int>& dropped_rows() const noexcept;
  int num_active_rows() const noexcept;
  SaddleMethod method() const noexcept;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& C, const Vector& b,
                            double rtol = kDefaultRtol);

/// Real parts of all eigenvalues of a dense square matrix, ascending.
std::vector<double> eig_real_parts(const DenseMatrix& S);

}  // namespace lodpg
