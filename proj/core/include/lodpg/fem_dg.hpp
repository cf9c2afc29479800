#pragma once

#include <array>
#include <span>
#include <vector>

#include "lodpg/coefficients.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/linalg.hpp"
#include "lodpg/lod.hpp"
#include "lodpg/mesh.hpp"

namespace lodpg {

/// Discontinuous bilinear function: 4 nodal values per cell, dof 4 * cell + a
/// with the local corner order (0,0), (1,0), (0,1), (1,1).
using DgFunction = Vector;

inline constexpr int kDgLocalDofs = 4;

enum class BoundaryKind { Dirichlet, Neumann };

/// Boundary data per side of the unit square, indexed by Side. Dirichlet
/// values are imposed weakly (Nitsche); Neumann values are the prescribed
/// A grad u . n_out.
struct DgBoundary {
  std::array<BoundaryKind, 4> kind{BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet,
                                   BoundaryKind::Dirichlet};
  std::array<double, 4> value{0.0, 0.0, 0.0, 0.0};

  static DgBoundary homogeneous_dirichlet() { return {}; }
  /// p = left on the left side, p = right on the right side, no flow elsewhere.
  static DgBoundary left_right(double left, double right);

  BoundaryKind kind_of(Side s) const noexcept { return kind[static_cast<int>(s)]; }
  double value_of(Side s) const noexcept { return value[static_cast<int>(s)]; }
  bool has_dirichlet() const noexcept;
};

/// The three pieces of the SIPG form: broken volume term, the symmetric
/// consistency terms and the penalty term (proportional to sigma).
struct SipgParts {
  SparseMatrix volume;
  SparseMatrix consistency;
  SparseMatrix penalty;
  SparseMatrix total() const { return volume + consistency + penalty; }
};

/// Default penalty 40 * beta0 (10 beta0 times the bilinear degree factor 4).
double default_sigma(const CoefficientField& A);

/// SIPG assembly on a uniform grid with one coefficient per cell. Works for
/// the fine and the coarse level alike. Boundary edges on Neumann sides
/// carry no terms.
SipgParts assemble_sipg_parts(const UniformGrid& grid, std::span<const double> coef, double sigma,
                              const DgBoundary& bc);
SparseMatrix assemble_sipg(const UniformGrid& grid, std::span<const double> coef, double sigma,
                           const DgBoundary& bc);

/// Throws ConfigError asking for a larger sigma when the matrix is not
/// positive definite.
void check_coercivity(const SparseMatrix& K, double sigma);

/// Block diagonal L2 Gram matrix of the DG space.
SparseMatrix assemble_dg_mass(const UniformGrid& grid);

/// Right-hand side (q, w) + Dirichlet terms (g, sigma/h w - A grad w . n)
/// + Neumann terms (g_N, w), with q constant per cell.
Vector assemble_dg_load(const UniformGrid& grid, std::span<const double> coef, double sigma,
                        const DgBoundary& bc, std::span<const double> q);

/// Coarse DG modes in fine coordinates (fine dofs x coarse dofs).
SparseMatrix dg_prolongation(const TwoLevelMesh& mesh);
/// L2 projection of a fine DG function onto the coarse DG space.
DgFunction dg_l2_interp(const TwoLevelMesh& mesh, const DgFunction& v);

/// Bilinear function matching constant Dirichlet side values (exact when the
/// values agree at shared corners, averaged at the corners otherwise). Zero
/// without Dirichlet sides.
SourceFn dirichlet_lifting(const DgBoundary& bc);

/// Samples a function at the cell corners.
DgFunction dg_interpolate(const UniformGrid& grid, const SourceFn& g);
/// Continuous nodal function (full nodal numbering) as a DG function.
DgFunction dg_from_nodal(const UniformGrid& grid, const Vector& nodal);

struct DgNorms {
  double l2 = 0.0;
  double grad = 0.0;     ///< ||A^{1/2} grad_h v||
  double jump = 0.0;     ///< (sum_e sigma/h_e ||[v]||^2)^{1/2}
  double dg() const noexcept { return grad + jump; }
};
DgNorms dg_norms(const UniformGrid& grid, std::span<const double> coef, double sigma, const DgBoundary& bc,
                 const DgFunction& v);

/// Fine SIPG solve, the reference for DG runs.
DgFunction solve_dg_reference(const UniformGrid& grid, std::span<const double> coef, double sigma,
                              const DgBoundary& bc, std::span<const double> q, double rtol = kDefaultRtol);

/// Discontinuous realization of the LOD space: every fine DG dof is free,
/// coarse dofs are the 4 bilinear modes per coarse cell, constraints the
/// moments against the coarse modes.
class DgLodSpace final : public LodSpace {
public:
  /// Fails with ConfigError when sigma does not make the fine form coercive.
  DgLodSpace(const TwoLevelMesh& mesh, const CoefficientField& A, double sigma, const DgBoundary& bc,
             bool check = true);

  const TwoLevelMesh& mesh() const override { return *mesh_; }
  const SparseMatrix& stiffness() const override { return K_; }
  const SparseMatrix& mass() const override { return M_; }
  const SparseMatrix& prolongation() const override { return P_; }
  const SparseRowMatrix& constraints() const override { return C_; }
  std::vector<int> patch_dofs(const Patch& patch) const override;
  std::vector<int> candidate_rows(const Patch& patch) const override;
  std::vector<int> element_coarse_dofs(int T) const override;
  SparseVector element_load(int T, int coarse_dof) const override;

  double sigma() const noexcept { return sigma_; }
  const DgBoundary& boundary() const noexcept { return bc_; }

private:
  const TwoLevelMesh* mesh_;
  double sigma_;
  DgBoundary bc_;
  SparseMatrix K_;
  SparseMatrix M_;
  SparseMatrix P_;
  SparseMatrix KP_;
  SparseRowMatrix C_;
};

/// LOD solution g_h + (P + Q) c with the lifting g_h = dg_interpolate of
/// dirichlet_lifting, so that the coarse system only sees F - K g_h. When
/// `system` is given it receives the coarse system.
DgFunction solve_dg_lod(const SparseMatrix& K, const SparseMatrix& P, const CorrectorBasis& basis, const Vector& F,
                        const DgFunction& lifting, Variant variant, double rtol = kDefaultRtol,
                        MsSystem* system = nullptr);

CorrectorBasis dg_correctors(const TwoLevelMesh& mesh, const CoefficientField& A, double sigma,
                             const DgBoundary& bc, Layers k, const CorrectorOptions& options = {});

/// Normal fluxes on the edges of a target grid (the fine grid or a coarser
/// grid nested in it) and the conservation residual of every target cell.
struct FluxField {
  UniformGrid grid;
  /// Flux through every edge along +axis (edge ids of `grid`).
  std::vector<double> edge_flux;
  /// sum of outward fluxes - integral of q, per cell.
  std::vector<double> residual;
  /// integral |q| + boundary inflow.
  double scale = 0.0;

  /// Flux leaving `cell` through edge `e` (a neighbor sees the negative).
  double outward(int cell, int e) const;
  /// The four edges of a cell: left, right, bottom, top.
  std::array<int, 4> cell_edges(int cell) const;
  double max_relative_residual() const;
};

/// Integrates the SIPG numerical flux -{A grad u . n} + sigma/h [u] over the
/// fine edges (boundary edges against the Dirichlet data, Neumann edges from
/// the prescribed flux) and sums it onto the edges of `target`.
FluxField extract_flux(const UniformGrid& fine, std::span<const double> coef, double sigma, const DgBoundary& bc,
                       const DgFunction& u, std::span<const double> q, const UniformGrid& target);

}  // namespace lodpg
