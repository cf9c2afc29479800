#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/SparseCore>

#include "lodpg/coefficients.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/linalg.hpp"
#include "lodpg/mesh.hpp"
#include "lodpg/quasi_interp.hpp"

namespace lodpg {

using SparseVector = Eigen::SparseVector<double, Eigen::ColMajor, int>;

/// Fine/coarse discretization pair seen by the corrector and assembly code.
/// Fine dofs are the free fine unknowns, coarse dofs the coarse basis
/// functions; constraint rows are the functionals whose kernel is W_h.
class LodSpace {
public:
  virtual ~LodSpace() = default;

  virtual const TwoLevelMesh& mesh() const = 0;
  int num_fine_dofs() const { return static_cast<int>(stiffness().rows()); }
  int num_coarse_dofs() const { return static_cast<int>(prolongation().cols()); }

  /// Fine bilinear form a_h on the free dofs (SPD).
  virtual const SparseMatrix& stiffness() const = 0;
  /// Fine L2 Gram matrix on the free dofs.
  virtual const SparseMatrix& mass() const = 0;
  /// Coarse basis in fine coordinates, fine x coarse.
  virtual const SparseMatrix& prolongation() const = 0;
  /// Constraint functionals, one row per coarse functional, columns fine dofs.
  virtual const SparseRowMatrix& constraints() const = 0;

  /// Free fine dofs of W_h(U) on the patch, ascending.
  virtual std::vector<int> patch_dofs(const Patch& patch) const = 0;
  /// Constraint rows that may be nonzero on the patch, ascending.
  virtual std::vector<int> candidate_rows(const Patch& patch) const = 0;
  /// Coarse dofs that receive a corrector from element T.
  virtual std::vector<int> element_coarse_dofs(int T) const = 0;
  /// The element-localized form a_h^T(P e_i, .) as a fine vector.
  virtual SparseVector element_load(int T, int coarse_dof) const = 0;
};

/// Continuous Q1 realization: free dofs are interior fine nodes, coarse dofs
/// interior coarse nodes, constraints the weighted Clement functionals.
class CgLodSpace final : public LodSpace {
public:
  CgLodSpace(const TwoLevelMesh& mesh, const CoefficientField& A);

  const TwoLevelMesh& mesh() const override { return *mesh_; }
  const SparseMatrix& stiffness() const override { return K_; }
  const SparseMatrix& mass() const override { return M_; }
  const SparseMatrix& prolongation() const override { return P_; }
  const SparseRowMatrix& constraints() const override { return constraints_.matrix(); }
  std::vector<int> patch_dofs(const Patch& patch) const override;
  std::vector<int> candidate_rows(const Patch& patch) const override;
  std::vector<int> element_coarse_dofs(int T) const override;
  SparseVector element_load(int T, int coarse_dof) const override;

  const CoefficientField& coefficient() const noexcept { return *A_; }

private:
  const TwoLevelMesh* mesh_;
  const CoefficientField* A_;
  SparseMatrix K_;
  SparseMatrix M_;
  SparseMatrix P_;
  CgConstraints constraints_;
};

/// Corrector Q_h^T(P e_i): values on the listed fine dofs, zero elsewhere.
struct Corrector {
  int T = 0;
  int coarse_dof = 0;
  std::vector<int> dofs;
  Vector values;
};

struct CorrectorBasis {
  Layers k;
  int num_fine_dofs = 0;
  int num_coarse_dofs = 0;
  /// Patch of every coarse element.
  std::vector<Patch> patches;
  /// Ordered by element, then by coarse dof.
  std::vector<Corrector> correctors;
  /// Constraint rows dropped per element (zero or dependent on the patch).
  std::vector<std::vector<int>> dropped;

  /// Global corrector Q = sum_T Q^T as a fine x coarse matrix.
  SparseMatrix matrix() const;
};

struct CorrectorOptions {
  int threads = 1;
  double rtol = kDefaultRtol;
  /// When non-empty, every corrector is also written to this directory.
  std::filesystem::path cache_dir;
};

/// Receives correctors in element order. `dropped` are the constraint rows
/// removed for the element's patch.
using CorrectorSink = std::function<void(const Patch& patch, const std::vector<int>& dropped,
                                         std::vector<Corrector>&& correctors)>;

/// Solves every local corrector problem
///   a_h(Q^T(P e_i), w) = -a_h^T(P e_i, w)  for all w in W_h(U_k(T)),
/// streaming the results element by element.
void for_each_corrector(const LodSpace& space, Layers k, const CorrectorOptions& options,
                        const CorrectorSink& sink);

CorrectorBasis compute_correctors(const LodSpace& space, Layers k, const CorrectorOptions& options = {});
CorrectorBasis compute_correctors(const TwoLevelMesh& mesh, const CoefficientField& A, Layers k,
                                  const CorrectorOptions& options = {});

/// Text cache file of one corrector: header `T z k n_dofs`, then one
/// `dof value` pair per line.
void write_corrector(const std::filesystem::path& file, const Corrector& c, Layers k);
Corrector read_corrector(const std::filesystem::path& file);

enum class Variant { G, PG };

struct MsSystem {
  SparseMatrix matrix;
  Vector rhs;
  Variant variant = Variant::PG;
  Layers k;
};

/// Accumulates the Petrov-Galerkin matrix P^T K (P + Q) one corrector at a
/// time: each corrector only adds its own column contribution, correctors
/// are never paired with each other.
class PgAccumulator {
public:
  PgAccumulator(const SparseMatrix& K, const SparseMatrix& P);
  void add(const Corrector& c);
  MsSystem finish(const Vector& fine_load, Layers k) const;

private:
  const SparseMatrix* K_;
  const SparseMatrix* P_;
  SparseRowMatrix KP_;
  std::vector<Triplet> triplets_;
  std::vector<double> acc_;
  std::vector<char> mark_;
  std::vector<int> touched_;
};

/// PG system with matrix P^T K (P + Q) and rhs P^T F.
MsSystem assemble_pg(const SparseMatrix& K, const SparseMatrix& P, const CorrectorBasis& basis,
                     const Vector& fine_load);
MsSystem assemble_pg(const LodSpace& space, const CorrectorBasis& basis, const Vector& fine_load);
/// PG assembly that drops every corrector right after its contribution.
MsSystem assemble_pg_streaming(const LodSpace& space, Layers k, const Vector& fine_load,
                               const CorrectorOptions& options = {});

/// Galerkin system (P + Q)^T K (P + Q), rhs (P + Q)^T F.
MsSystem assemble_g(const SparseMatrix& K, const SparseMatrix& P, const CorrectorBasis& basis,
                    const Vector& fine_load);
MsSystem assemble_g(const LodSpace& space, const CorrectorBasis& basis, const Vector& fine_load);

/// Coarse coefficients of the LOD solution. Throws InfSupError when a PG
/// system is singular.
Vector solve_ms(const MsSystem& system, double rtol = kDefaultRtol);

/// Fine representation (P + Q) c of a coarse coefficient vector.
Vector reconstruct(const SparseMatrix& P, const CorrectorBasis& basis, const Vector& coarse);

/// Smallest real part of the spectrum of the coarse matrix.
double infsup_diagnostic(const MsSystem& system);

/// Projection of fine vectors onto ker C (Euclidean), used to draw random
/// members of W_h.
class KernelProjector {
public:
  explicit KernelProjector(const SparseRowMatrix& C);
  Vector project(const Vector& r) const;

private:
  SparseMatrix C_;
  SpdSolver gram_;
};

/// max over random coarse c and random w in W_h of
///   |a_h((P+Q)c, w)| / (|||(P+Q)c||| |||w|||).
double quasi_orthogonality(const LodSpace& space, const CorrectorBasis& basis, int trials,
                           std::uint64_t seed = 1);

/// max over random coarse c of ||Q c||_L2 / (H |||(P+Q)c|||).
double fine_part_bound_check(const LodSpace& space, const CorrectorBasis& basis, int trials,
                             std::uint64_t seed = 1);

}  // namespace lodpg
