#include "lodpg/quasi_interp.hpp"

#include <algorithm>

namespace lodpg {

CoarseFunction clement_weights(const TwoLevelMesh& mesh, const FineFunction& v) {
  const SparseMatrix P = prolongation(mesh);
  const SparseMatrix M = assemble_mass(mesh);
  const Vector num = P.transpose() * (M * v);
  const Vector den = P.transpose() * (M * Vector::Ones(v.size()));
  CoarseFunction out = CoarseFunction::Zero(mesh.coarse().num_nodes());
  for (int z : mesh.interior_coarse_nodes()) out[z] = num[z] / den[z];
  return out;
}

CoarseFunction l2_project_coarse(const TwoLevelMesh& mesh, const FineFunction& v, double rtol) {
  const SparseMatrix P = prolongation(mesh);
  const SparseMatrix M = assemble_mass(mesh);
  const SparseMatrix MP = M * P;
  const Vector rhs_full = MP.transpose() * v;
  const SparseMatrix MH_full = P.transpose() * MP;
  const auto& inner = mesh.interior_coarse_nodes();
  const SparseMatrix MH = restrict_matrix(MH_full, inner);
  Vector rhs(static_cast<int>(inner.size()));
  for (std::size_t i = 0; i < inner.size(); ++i) rhs[static_cast<int>(i)] = rhs_full[inner[i]];
  const Vector c = solve_spd(MH, rhs, rtol);
  CoarseFunction out = CoarseFunction::Zero(mesh.coarse().num_nodes());
  for (std::size_t i = 0; i < inner.size(); ++i) out[inner[i]] = c[static_cast<int>(i)];
  return out;
}

CgConstraints::CgConstraints(const TwoLevelMesh& mesh) : mesh_(&mesh) {
  const SparseMatrix P0 = prolongation_interior(mesh);
  const SparseMatrix M0 = interior_block(mesh, assemble_mass(mesh));
  C_ = SparseRowMatrix(SparseMatrix(P0.transpose()) * M0);
  C_.prune(0.0);
}

std::vector<int> CgConstraints::candidate_nodes(const Patch& patch) const {
  const TwoLevelMesh& m = *mesh_;
  const int r = m.ratio();
  const int nc = m.n_coarse();
  std::vector<int> out;
  for (int J = 1; J < nc; ++J) {
    if (!((J - 1) * r < patch.box.j1 && (J + 1) * r > patch.box.j0)) continue;
    for (int I = 1; I < nc; ++I) {
      if (!((I - 1) * r < patch.box.i1 && (I + 1) * r > patch.box.i0)) continue;
      out.push_back(m.interior_coarse_index(m.coarse().node(I, J)));
    }
  }
  return out;
}

std::vector<int> patch_interior_dofs(const TwoLevelMesh& mesh, const Patch& patch) {
  std::vector<int> dofs;
  for (int v : patch.interior_fine_nodes(mesh.fine())) dofs.push_back(mesh.interior_fine_index(v));
  return dofs;
}

ConstraintSet CgConstraints::for_patch(const Patch& patch) const {
  ConstraintSet cs;
  cs.dofs = patch_interior_dofs(*mesh_, patch);
  std::vector<int> local(static_cast<std::size_t>(C_.cols()), -1);
  for (std::size_t i = 0; i < cs.dofs.size(); ++i) local[cs.dofs[i]] = static_cast<int>(i);
  std::vector<Triplet> t;
  for (int z : candidate_nodes(patch)) {
    bool any = false;
    const int row = static_cast<int>(cs.active_nodes.size());
    for (SparseRowMatrix::InnerIterator it(C_, z); it; ++it) {
      const int l = local[it.col()];
      if (l >= 0 && it.value() != 0.0) {
        t.emplace_back(row, l, it.value());
        any = true;
      }
    }
    (any ? cs.active_nodes : cs.dropped).push_back(z);
  }
  cs.C = SparseMatrix(static_cast<int>(cs.active_nodes.size()), static_cast<int>(cs.dofs.size()));
  cs.C.setFromTriplets(t.begin(), t.end());
  return cs;
}

ConstraintSet constraints_for_patch(const TwoLevelMesh& mesh, const Patch& patch) {
  return CgConstraints(mesh).for_patch(patch);
}

}  // namespace lodpg
