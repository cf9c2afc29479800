#include "lodpg/fem_cg.hpp"

#include <cmath>
#include <stdexcept>

namespace lodpg {

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

constexpr double kGauss = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2

// bilinear shape values at reference point (s, t), node order (0,0),(1,0),(0,1),(1,1)
std::array<double, 4> q1_shape(double s, double t) {
  return {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
}

}  // namespace

const Mat4& q1_stiffness_ref() {
  static const Mat4 k = {{{4.0 / 6, -1.0 / 6, -1.0 / 6, -2.0 / 6},
                          {-1.0 / 6, 4.0 / 6, -2.0 / 6, -1.0 / 6},
                          {-1.0 / 6, -2.0 / 6, 4.0 / 6, -1.0 / 6},
                          {-2.0 / 6, -1.0 / 6, -1.0 / 6, 4.0 / 6}}};
  return k;
}

Mat4 q1_mass(double h) {
  const double s = h * h / 36.0;
  return {{{4 * s, 2 * s, 2 * s, 1 * s},
           {2 * s, 4 * s, 1 * s, 2 * s},
           {2 * s, 1 * s, 4 * s, 2 * s},
           {1 * s, 2 * s, 2 * s, 4 * s}}};
}

namespace {

SparseMatrix assemble_cells(const UniformGrid& g, std::span<const int> cells, const Mat4& ref,
                            const CoefficientField* A) {
  std::vector<Triplet> t;
  t.reserve(cells.size() * 16);
  for (int c : cells) {
    const auto nodes = g.cell_nodes(c);
    const double a = A ? (*A)[c] : 1.0;
    for (int r = 0; r < 4; ++r)
      for (int s = 0; s < 4; ++s) t.emplace_back(nodes[r], nodes[s], a * ref[r][s]);
  }
  SparseMatrix K(g.num_nodes(), g.num_nodes());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

std::vector<int> all_cells(const UniformGrid& g) {
  std::vector<int> c(static_cast<std::size_t>(g.num_cells()));
  for (int i = 0; i < g.num_cells(); ++i) c[i] = i;
  return c;
}

}  // namespace

SparseMatrix assemble_stiffness(const TwoLevelMesh& mesh, const CoefficientField& A) {
  const auto cells = all_cells(mesh.fine());
  return assemble_stiffness(mesh, A, cells);
}

SparseMatrix assemble_stiffness(const TwoLevelMesh& mesh, const CoefficientField& A,
                                std::span<const int> region) {
  if (A.size() != static_cast<std::size_t>(mesh.num_fine_cells())) {
    throw std::invalid_argument("coefficient size does not match the fine mesh");
  }
  return assemble_cells(mesh.fine(), region, q1_stiffness_ref(), &A);
}

SparseMatrix assemble_mass(const TwoLevelMesh& mesh) {
  const auto cells = all_cells(mesh.fine());
  return assemble_cells(mesh.fine(), cells, q1_mass(mesh.h()), nullptr);
}

Vector assemble_load(const TwoLevelMesh& mesh, const SourceFn& f) {
  const UniformGrid& g = mesh.fine();
  const double h = g.h();
  const double gp[2] = {kGauss, 1.0 - kGauss};
  Vector F = Vector::Zero(g.num_nodes());
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto [i, j] = g.cell_ij(c);
    const auto nodes = g.cell_nodes(c);
    for (double t : gp) {
      for (double s : gp) {
        const double fx = f((i + s) * h, (j + t) * h) * 0.25 * h * h;
        const auto phi = q1_shape(s, t);
        for (int r = 0; r < 4; ++r) F[nodes[r]] += fx * phi[r];
      }
    }
  }
  for (int v = 0; v < g.num_nodes(); ++v)
    if (g.on_boundary(v)) F[v] = 0.0;
  return F;
}

Vector assemble_load(const TwoLevelMesh& mesh, std::span<const double> cell_values) {
  const UniformGrid& g = mesh.fine();
  if (cell_values.size() != static_cast<std::size_t>(g.num_cells())) {
    throw std::invalid_argument("cell source size does not match the fine mesh");
  }
  const double quarter = 0.25 * g.h() * g.h();
  Vector F = Vector::Zero(g.num_nodes());
  for (int c = 0; c < g.num_cells(); ++c) {
    for (int v : g.cell_nodes(c)) F[v] += cell_values[c] * quarter;
  }
  for (int v = 0; v < g.num_nodes(); ++v)
    if (g.on_boundary(v)) F[v] = 0.0;
  return F;
}

Vector restrict_to_interior(const TwoLevelMesh& mesh, const FineFunction& v) {
  const auto& nodes = mesh.interior_fine_nodes();
  Vector r(static_cast<int>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) r[static_cast<int>(i)] = v[nodes[i]];
  return r;
}

FineFunction extend_from_interior(const TwoLevelMesh& mesh, const Vector& v) {
  const auto& nodes = mesh.interior_fine_nodes();
  FineFunction r = FineFunction::Zero(mesh.fine().num_nodes());
  for (std::size_t i = 0; i < nodes.size(); ++i) r[nodes[i]] = v[static_cast<int>(i)];
  return r;
}

SparseMatrix interior_block(const TwoLevelMesh& mesh, const SparseMatrix& full) {
  return restrict_matrix(full, mesh.interior_fine_nodes());
}

FineFunction solve_reference(const TwoLevelMesh& mesh, const CoefficientField& A, const Vector& load,
                             double rtol) {
  const SparseMatrix K = interior_block(mesh, assemble_stiffness(mesh, A));
  const Vector x = solve_spd(K, restrict_to_interior(mesh, load), rtol);
  return extend_from_interior(mesh, x);
}

FineFunction solve_reference(const TwoLevelMesh& mesh, const CoefficientField& A, const SourceFn& f,
                             double rtol) {
  return solve_reference(mesh, A, assemble_load(mesh, f), rtol);
}

Norms norms(const TwoLevelMesh& mesh, const CoefficientField& A, const FineFunction& v) {
  const UniformGrid& g = mesh.fine();
  const Mat4& K = q1_stiffness_ref();
  const Mat4 M = q1_mass(g.h());
  double l2 = 0.0, semi = 0.0, en = 0.0;
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto nodes = g.cell_nodes(c);
    double x[4];
    for (int r = 0; r < 4; ++r) x[r] = v[nodes[r]];
    double qm = 0.0, qk = 0.0;
    for (int r = 0; r < 4; ++r) {
      for (int s = 0; s < 4; ++s) {
        qm += x[r] * M[r][s] * x[s];
        qk += x[r] * K[r][s] * x[s];
      }
    }
    l2 += qm;
    semi += qk;
    en += A[c] * qk;
  }
  Norms n;
  n.l2 = std::sqrt(std::max(0.0, l2));
  n.h1_semi = std::sqrt(std::max(0.0, semi));
  n.h1 = std::sqrt(std::max(0.0, l2) + std::max(0.0, semi));
  n.energy = std::sqrt(std::max(0.0, en));
  return n;
}

RelativeErrors relative_errors(const TwoLevelMesh& mesh, const CoefficientField& A,
                               const FineFunction& ref, const FineFunction& v) {
  const Norms r = norms(mesh, A, ref);
  const Norms e = norms(mesh, A, FineFunction(ref - v));
  if (r.l2 == 0.0 || r.h1_semi == 0.0 || r.energy == 0.0) {
    throw std::domain_error("relative error against a zero reference");
  }
  return {e.l2 / r.l2, e.h1_semi / r.h1_semi, e.h1 / r.h1, e.energy / r.energy};
}

SparseMatrix prolongation(const TwoLevelMesh& mesh) {
  const UniformGrid& f = mesh.fine();
  const UniformGrid& c = mesh.coarse();
  const int r = mesh.ratio();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(f.num_nodes()) * 4);
  for (int v = 0; v < f.num_nodes(); ++v) {
    const auto [i, j] = f.node_ij(v);
    const int I = i / r, J = j / r;
    const double sx = static_cast<double>(i % r) / r, sy = static_cast<double>(j % r) / r;
    const double wx[2] = {1.0 - sx, sx};
    const double wy[2] = {1.0 - sy, sy};
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) {
        const double w = wx[a] * wy[b];
        if (w != 0.0) t.emplace_back(v, c.node(I + a, J + b), w);
      }
  }
  SparseMatrix P(f.num_nodes(), c.num_nodes());
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

SparseMatrix prolongation_interior(const TwoLevelMesh& mesh) {
  const SparseMatrix P = prolongation(mesh);
  std::vector<Triplet> t;
  for (int col = 0; col < P.outerSize(); ++col) {
    const int jc = mesh.interior_coarse_index(col);
    if (jc < 0) continue;
    for (SparseMatrix::InnerIterator it(P, col); it; ++it) {
      const int ir = mesh.interior_fine_index(static_cast<int>(it.row()));
      if (ir >= 0) t.emplace_back(ir, jc, it.value());
    }
  }
  SparseMatrix P0(mesh.num_interior_fine_nodes(), mesh.num_interior_coarse_nodes());
  P0.setFromTriplets(t.begin(), t.end());
  return P0;
}

FineFunction prolong(const TwoLevelMesh& mesh, const CoarseFunction& c) { return prolongation(mesh) * c; }

}  // namespace lodpg
