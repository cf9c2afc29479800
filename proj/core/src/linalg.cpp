#include "lodpg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "lodpg/error.hpp"

namespace lodpg {

SparseMatrix restrict_matrix(const SparseMatrix& A, std::span<const int> dofs) {
  const int n = static_cast<int>(dofs.size());
  std::vector<int> map(static_cast<std::size_t>(A.rows()), -1);
  for (int i = 0; i < n; ++i) map[dofs[i]] = i;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) * 9);
  for (int jj = 0; jj < n; ++jj) {
    for (SparseMatrix::InnerIterator it(A, dofs[jj]); it; ++it) {
      const int ii = map[it.row()];
      if (ii >= 0) t.emplace_back(ii, jj, it.value());
    }
  }
  SparseMatrix R(n, n);
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

SparseMatrix select_columns(const SparseMatrix& A, std::span<const int> cols) {
  std::vector<Triplet> t;
  for (int jj = 0; jj < static_cast<int>(cols.size()); ++jj)
    for (SparseMatrix::InnerIterator it(A, cols[jj]); it; ++it) t.emplace_back(it.row(), jj, it.value());
  SparseMatrix R(A.rows(), static_cast<int>(cols.size()));
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

// ---------------------------------------------------------------------------

struct SpdSolver::Impl {
  SparseMatrix A;
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  double rtol;
};

SpdSolver::SpdSolver(const SparseMatrix& A, double rtol) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw SolverError("SPD solve: matrix is not square");
  impl_->A = A;
  impl_->rtol = rtol;
  if (A.rows() == 0) return;
  impl_->llt.compute(impl_->A);
  if (impl_->llt.info() != Eigen::Success) {
    throw SolverError("SPD solve: Cholesky factorization failed (matrix not positive definite?)");
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

int SpdSolver::size() const noexcept { return static_cast<int>(impl_->A.rows()); }

Vector SpdSolver::solve(const Vector& b) const {
  if (b.size() != impl_->A.rows()) throw SolverError("SPD solve: dimension mismatch");
  if (b.size() == 0) return Vector();
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x = impl_->llt.solve(b);
  for (int refine = 0; refine < 4; ++refine) {
    const Vector r = b - impl_->A * x;
    if (!r.allFinite()) break;
    if (r.norm() <= impl_->rtol * bnorm) return x;
    x += impl_->llt.solve(r);
  }
  const double rel = (b - impl_->A * x).norm() / bnorm;
  if (!(rel <= impl_->rtol)) {
    throw SolverError("SPD solve: relative residual " + std::to_string(rel) + " above tolerance");
  }
  return x;
}

DenseMatrix SpdSolver::solve(const DenseMatrix& B) const {
  if (B.rows() != impl_->A.rows()) throw SolverError("SPD solve: dimension mismatch");
  if (B.rows() == 0 || B.cols() == 0) return DenseMatrix::Zero(B.rows(), B.cols());
  return impl_->llt.solve(B);
}

Vector solve_spd(const SparseMatrix& A, const Vector& b, double rtol) {
  return SpdSolver(A, rtol).solve(b);
}

// ---------------------------------------------------------------------------

struct LuSolver::Impl {
  SparseMatrix A;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  double rtol;
};

LuSolver::LuSolver(const SparseMatrix& A, double rtol) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw SolverError("LU solve: matrix is not square");
  impl_->A = A;
  impl_->A.makeCompressed();
  impl_->rtol = rtol;
  if (A.rows() == 0) return;
  impl_->lu.compute(impl_->A);
  if (impl_->lu.info() != Eigen::Success) throw SolverError("LU solve: matrix is singular (" + impl_->lu.lastErrorMessage() + ")");
}

LuSolver::~LuSolver() = default;
LuSolver::LuSolver(LuSolver&&) noexcept = default;
LuSolver& LuSolver::operator=(LuSolver&&) noexcept = default;

Vector LuSolver::solve(const Vector& b) const {
  if (b.size() != impl_->A.rows()) throw SolverError("LU solve: dimension mismatch");
  if (b.size() == 0) return Vector();
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(b.size());
  Vector x = impl_->lu.solve(b);
  if (!x.allFinite()) throw SolverError("LU solve: matrix is singular");
  for (int refine = 0; refine < 4; ++refine) {
    const Vector r = b - impl_->A * x;
    if (r.norm() <= impl_->rtol * bnorm) return x;
    x += impl_->lu.solve(r);
  }
  const double rel = (b - impl_->A * x).norm() / bnorm;
  if (!(rel <= impl_->rtol)) {
    throw SolverError("LU solve: relative residual " + std::to_string(rel) + " above tolerance");
  }
  return x;
}

// ---------------------------------------------------------------------------

namespace {

SparseRowMatrix rows_of(const SparseRowMatrix& C, const std::vector<int>& rows) {
  std::vector<Triplet> t;
  for (int k = 0; k < static_cast<int>(rows.size()); ++k)
    for (SparseRowMatrix::InnerIterator it(C, rows[k]); it; ++it) t.emplace_back(k, it.col(), it.value());
  SparseRowMatrix M(static_cast<int>(rows.size()), C.cols());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace

struct SaddleSolver::Impl {
  SparseMatrix A;
  SparseRowMatrix C_all;
  SparseMatrix C;  // active rows
  std::vector<int> active;
  std::vector<int> dropped;
  int total_rows = 0;
  double rtol = kDefaultRtol;
  SaddleMethod used = SaddleMethod::Kkt;

  // sparse factorization of [A C^T; C 0]
  SparseMatrix kkt;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;

  // Schur complement route
  std::unique_ptr<SpdSolver> a_solver;
  DenseMatrix Y;  // A^-1 C^T
  Eigen::LDLT<DenseMatrix> schur;

  bool build_kkt() {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(C.rows());
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(A.nonZeros() + 2 * C.nonZeros()));
    for (int j = 0; j < A.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(A, j); it; ++it) t.emplace_back(it.row(), j, it.value());
    for (int j = 0; j < C.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(C, j); it; ++it) {
        t.emplace_back(n + it.row(), j, it.value());
        t.emplace_back(j, n + it.row(), it.value());
      }
    kkt = SparseMatrix(n + m, n + m);
    kkt.setFromTriplets(t.begin(), t.end());
    kkt.makeCompressed();
    lu.compute(kkt);
    return lu.info() == Eigen::Success;
  }

  void build_schur() {
    used = SaddleMethod::Schur;
    if (!a_solver) a_solver = std::make_unique<SpdSolver>(A, rtol);
    Y = a_solver->solve(DenseMatrix(C.transpose()));
    DenseMatrix S = C * Y;
    schur.compute(S);

    // Pivoted LDL^T: pivots far below the largest one belong to rows that
    // depend on the others.
    const Vector d = schur.vectorD().cwiseAbs();
    const double dmax = d.size() ? d.maxCoeff() : 0.0;
    Eigen::VectorXi p = Eigen::VectorXi::LinSpaced(S.rows(), 0, static_cast<int>(S.rows()) - 1);
    p = schur.transpositionsP() * p;
    std::vector<int> dependent;
    for (int i = 0; i < d.size(); ++i)
      if (d[i] <= 1e-12 * dmax) dependent.push_back(p[i]);
    if (dependent.empty() && schur.info() == Eigen::Success) return;

    std::sort(dependent.begin(), dependent.end());
    std::vector<int> keep;
    for (int k = 0; k < static_cast<int>(active.size()); ++k) {
      if (std::binary_search(dependent.begin(), dependent.end(), k)) dropped.push_back(active[k]);
      else keep.push_back(active[k]);
    }
    std::sort(dropped.begin(), dropped.end());
    active = std::move(keep);
    C = SparseMatrix(rows_of(C_all, active));
    Y = a_solver->solve(DenseMatrix(C.transpose()));
    S = C * Y;
    schur.compute(S);
    if (schur.info() != Eigen::Success) throw SolverError("saddle solve: Schur complement factorization failed");
  }

  bool acceptable(const Vector& b, const Vector& x, const Vector& lam) const {
    if (!x.allFinite() || !lam.allFinite()) return false;
    const double bn = b.norm();
    const double res = (A * x + C.transpose() * lam - b).norm();
    const double cx = C.rows() ? (C * x).lpNorm<Eigen::Infinity>() : 0.0;
    return res <= rtol * bn && cx <= rtol * x.lpNorm<Eigen::Infinity>();
  }

  bool solve_kkt(const Vector& b, Vector& x, Vector& lam) const {
    const int n = static_cast<int>(A.rows());
    Vector rhs = Vector::Zero(kkt.rows());
    rhs.head(n) = b;
    Vector z = lu.solve(rhs);
    for (int refine = 0; refine < 3 && z.allFinite(); ++refine) {
      const Vector r = rhs - kkt * z;
      if (r.norm() <= 1e-3 * rtol * rhs.norm()) break;
      z += lu.solve(r);
    }
    x = z.head(n);
    lam = z.tail(kkt.rows() - n);
    return acceptable(b, x, lam);
  }

  void solve_schur(const Vector& b, Vector& x, Vector& lam) const {
    x = a_solver->solve(b);
    lam = Vector::Zero(C.rows());
    if (C.rows() == 0) return;
    lam = schur.solve(C * x);
    x -= Y * lam;
    const Vector cx = C * x;
    if (cx.lpNorm<Eigen::Infinity>() > 1e-3 * rtol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) {
      const Vector dl = schur.solve(cx);
      x -= Y * dl;
      lam += dl;
    }
  }
};

SaddleSolver::SaddleSolver(const SparseMatrix& A, const SparseMatrix& C, double rtol, SaddleMethod method)
    : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols()) throw SolverError("saddle solve: matrix is not square");
  if (C.cols() != A.rows()) throw SolverError("saddle solve: constraint width does not match A");
  Impl& s = *impl_;
  s.A = A;
  s.rtol = rtol;
  s.total_rows = static_cast<int>(C.rows());
  s.C_all = C;
  // identically zero rows carry no constraint
  for (int r = 0; r < s.C_all.rows(); ++r) {
    bool any = false;
    for (SparseRowMatrix::InnerIterator it(s.C_all, r); it; ++it) any = any || it.value() != 0.0;
    (any ? s.active : s.dropped).push_back(r);
  }
  s.C = SparseMatrix(rows_of(s.C_all, s.active));
  if (A.rows() == 0) return;

  if (method == SaddleMethod::Kkt && s.build_kkt()) {
    s.used = SaddleMethod::Kkt;
    return;
  }
  s.build_schur();
}

SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;

const std::vector<int>& SaddleSolver::dropped_rows() const noexcept { return impl_->dropped; }
int SaddleSolver::num_active_rows() const noexcept { return static_cast<int>(impl_->active.size()); }
SaddleMethod SaddleSolver::method() const noexcept { return impl_->used; }

SaddleSolution SaddleSolver::solve(const Vector& b) {
  Impl& s = *impl_;
  if (b.size() != s.A.rows()) throw SolverError("saddle solve: dimension mismatch");
  SaddleSolution sol;
  sol.lambda = Vector::Zero(s.total_rows);
  if (b.size() == 0 || b.norm() == 0.0) {
    sol.x = Vector::Zero(b.size());
    return sol;
  }
  Vector x, lam;
  bool ok = false;
  if (s.used == SaddleMethod::Kkt) {
    ok = s.solve_kkt(b, x, lam);
    // a factorization that cannot meet the contract falls back to the
    // rank-revealing Schur complement route
    if (!ok) s.build_schur();
  }
  if (!ok) {
    s.solve_schur(b, x, lam);
    if (!s.acceptable(b, x, lam)) throw SolverError("saddle solve: residual contract not met");
  }
  for (int k = 0; k < static_cast<int>(s.active.size()); ++k) sol.lambda[s.active[k]] = lam[k];
  sol.x = std::move(x);
  return sol;
}

SaddleSolution solve_saddle(const SparseMatrix& A, const SparseMatrix& C, const Vector& b, double rtol) {
  return SaddleSolver(A, C, rtol).solve(b);
}

std::vector<double> eig_real_parts(const DenseMatrix& S) {
  if (S.rows() != S.cols()) throw SolverError("eigenvalues: matrix is not square");
  if (S.rows() == 0) return {};
  Eigen::EigenSolver<DenseMatrix> es(S, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SolverError("eigenvalues: QR iteration did not converge");
  std::vector<double> re(static_cast<std::size_t>(S.rows()));
  for (int i = 0; i < S.rows(); ++i) re[i] = es.eigenvalues()[i].real();
  std::sort(re.begin(), re.end());
  return re;
}

}  // namespace lodpg
