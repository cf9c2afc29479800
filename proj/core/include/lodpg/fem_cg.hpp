#pragma once

#include <array>
#include <functional>
#include <span>

#include "lodpg/coefficients.hpp"
#include "lodpg/linalg.hpp"
#include "lodpg/mesh.hpp"

namespace lodpg {

/// Nodal vector on the fine grid, one value per fine node (boundary included).
using FineFunction = Vector;
/// Nodal vector on the coarse grid, one value per coarse node (boundary included).
using CoarseFunction = Vector;

using SourceFn = std::function<double(double, double)>;

/// Q1 element stiffness of the unit-coefficient Laplacian on a square cell,
/// node order (0,0), (1,0), (0,1), (1,1). Independent of the cell size.
const std::array<std::array<double, 4>, 4>& q1_stiffness_ref();
/// Q1 element mass on a square cell of side h.
std::array<std::array<double, 4>, 4> q1_mass(double h);

/// Stiffness matrix over all fine nodes, a_h(v, w) = sum_t A_t int_t grad v . grad w.
SparseMatrix assemble_stiffness(const TwoLevelMesh& mesh, const CoefficientField& A);
/// Same, restricted to the given fine cells (empty region gives the zero matrix).
SparseMatrix assemble_stiffness(const TwoLevelMesh& mesh, const CoefficientField& A,
                                std::span<const int> region);
SparseMatrix assemble_mass(const TwoLevelMesh& mesh);

/// Load vector (f, phi_j) over all fine nodes with 2x2 Gauss per fine cell;
/// boundary entries are zero.
Vector assemble_load(const TwoLevelMesh& mesh, const SourceFn& f);
/// Load vector for a source that is constant on each fine cell.
Vector assemble_load(const TwoLevelMesh& mesh, std::span<const double> cell_values);

/// Restriction of nodal fine vectors / matrices to the interior fine nodes.
Vector restrict_to_interior(const TwoLevelMesh& mesh, const FineFunction& v);
FineFunction extend_from_interior(const TwoLevelMesh& mesh, const Vector& v);
SparseMatrix interior_block(const TwoLevelMesh& mesh, const SparseMatrix& full);

/// Fine-scale reference solution u_h with zero Dirichlet data.
FineFunction solve_reference(const TwoLevelMesh& mesh, const CoefficientField& A, const Vector& load,
                             double rtol = kDefaultRtol);
FineFunction solve_reference(const TwoLevelMesh& mesh, const CoefficientField& A, const SourceFn& f,
                             double rtol = kDefaultRtol);

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;      ///< full norm sqrt(l2^2 + h1_semi^2)
  double energy = 0.0;  ///< ||A^{1/2} grad v||
};

/// Exact norms of a fine Q1 function.
Norms norms(const TwoLevelMesh& mesh, const CoefficientField& A, const FineFunction& v);

struct RelativeErrors {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h1 = 0.0;
  double energy = 0.0;
};

/// ||ref - v|| / ||ref|| in each norm. Throws std::domain_error if a norm of
/// the reference is zero.
RelativeErrors relative_errors(const TwoLevelMesh& mesh, const CoefficientField& A,
                               const FineFunction& ref, const FineFunction& v);

/// Bilinear interpolation of coarse nodal vectors onto fine nodes,
/// (n_fine+1)^2 x (n_coarse+1)^2.
SparseMatrix prolongation(const TwoLevelMesh& mesh);
/// Interior fine nodes x interior coarse nodes block of prolongation().
SparseMatrix prolongation_interior(const TwoLevelMesh& mesh);

FineFunction prolong(const TwoLevelMesh& mesh, const CoarseFunction& c);

}  // namespace lodpg
