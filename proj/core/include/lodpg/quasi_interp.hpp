#pragma once

#include <vector>

#include "lodpg/fem_cg.hpp"

namespace lodpg {

/// Weighted Clement operator I_H: nodal values v_z = (v, Phi_z) / (1, Phi_z)
/// at interior coarse nodes, zero on the boundary.
CoarseFunction clement_weights(const TwoLevelMesh& mesh, const FineFunction& v);

/// L2 projection onto the coarse space V_H (zero boundary values).
CoarseFunction l2_project_coarse(const TwoLevelMesh& mesh, const FineFunction& v, double rtol = kDefaultRtol);

/// Constraint functionals of a patch corrector problem.
struct ConstraintSet {
  /// Interior fine node indices (compact numbering) of the patch, ascending.
  std::vector<int> dofs;
  /// Interior coarse node indices (compact numbering) whose row survives.
  std::vector<int> active_nodes;
  /// Rows (v, Phi_z) for z in active_nodes, columns over dofs.
  SparseMatrix C;
  /// Candidate nodes whose row was identically zero on the patch.
  std::vector<int> dropped;
};

/// Global constraint matrix C = P0^T M0 of the CG remainder space
/// W_h = { v : C v = 0 }, plus patch restriction.
class CgConstraints {
public:
  explicit CgConstraints(const TwoLevelMesh& mesh);

  /// Interior coarse nodes x interior fine nodes.
  const SparseRowMatrix& matrix() const noexcept { return C_; }
  /// Interior coarse nodes whose hat support overlaps the patch with positive area.
  std::vector<int> candidate_nodes(const Patch& patch) const;
  ConstraintSet for_patch(const Patch& patch) const;

private:
  const TwoLevelMesh* mesh_;
  SparseRowMatrix C_;
};

ConstraintSet constraints_for_patch(const TwoLevelMesh& mesh, const Patch& patch);

/// Interior fine node indices (compact numbering) strictly inside the patch.
std::vector<int> patch_interior_dofs(const TwoLevelMesh& mesh, const Patch& patch);

}  // namespace lodpg
