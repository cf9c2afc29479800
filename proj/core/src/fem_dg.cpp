#include "lodpg/fem_dg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "lodpg/error.hpp"

namespace lodpg {

namespace {

constexpr int kNq = 2;
// 2-point Gauss rule on [0, 1]
const double kGaussT[kNq] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};

/// Values and +axis derivatives of the 4 local basis functions on a cell of
/// width h at local coordinate `s` across the axis and `t` along the edge.
struct Trace {
  double val[4];
  double dn[4];
};

Trace trace(int axis, double s, double t, double h) {
  Trace tr{};
  const double x = axis == 0 ? s : t;
  const double y = axis == 0 ? t : s;
  tr.val[0] = (1 - x) * (1 - y);
  tr.val[1] = x * (1 - y);
  tr.val[2] = (1 - x) * y;
  tr.val[3] = x * y;
  if (axis == 0) {
    tr.dn[0] = -(1 - y) / h;
    tr.dn[1] = (1 - y) / h;
    tr.dn[2] = -y / h;
    tr.dn[3] = y / h;
  } else {
    tr.dn[0] = -(1 - x) / h;
    tr.dn[1] = -x / h;
    tr.dn[2] = (1 - x) / h;
    tr.dn[3] = x / h;
  }
  return tr;
}

/// Jump and flux-average weights of the local dofs at one quadrature point
/// of an edge. Interior edges couple 8 dofs (minus cell first), boundary
/// edges the 4 dofs of their cell with the outward normal.
struct EdgePoint {
  int n = 0;
  int dof[8];
  double J[8];
  double G[8];
  double val[8];
};

struct EdgeGeometry {
  int cell = -1;    ///< boundary cell
  double sgn = 0;   ///< outward normal = sgn * axis for boundary edges
};

EdgeGeometry boundary_geometry(const GridEdge& e) {
  return e.minus >= 0 ? EdgeGeometry{e.minus, 1.0} : EdgeGeometry{e.plus, -1.0};
}

EdgePoint edge_point(const GridEdge& e, std::span<const double> coef, double h, double t) {
  EdgePoint p;
  if (!e.boundary()) {
    const Trace m = trace(e.axis, 1.0, t, h);
    const Trace q = trace(e.axis, 0.0, t, h);
    p.n = 8;
    for (int a = 0; a < 4; ++a) {
      p.dof[a] = kDgLocalDofs * e.minus + a;
      p.dof[4 + a] = kDgLocalDofs * e.plus + a;
      p.J[a] = m.val[a];
      p.J[4 + a] = -q.val[a];
      p.G[a] = 0.5 * coef[static_cast<std::size_t>(e.minus)] * m.dn[a];
      p.G[4 + a] = 0.5 * coef[static_cast<std::size_t>(e.plus)] * q.dn[a];
      p.val[a] = m.val[a];
      p.val[4 + a] = q.val[a];
    }
  } else {
    const EdgeGeometry g = boundary_geometry(e);
    const Trace c = trace(e.axis, g.sgn > 0 ? 1.0 : 0.0, t, h);
    p.n = 4;
    for (int a = 0; a < 4; ++a) {
      p.dof[a] = kDgLocalDofs * g.cell + a;
      p.J[a] = c.val[a];
      p.G[a] = coef[static_cast<std::size_t>(g.cell)] * g.sgn * c.dn[a];
      p.val[a] = c.val[a];
    }
  }
  return p;
}

void check_sizes(const UniformGrid& grid, std::span<const double> coef) {
  if (coef.size() != static_cast<std::size_t>(grid.num_cells())) {
    throw std::invalid_argument("coefficient size does not match the grid");
  }
}

}  // namespace

DgBoundary DgBoundary::left_right(double left, double right) {
  DgBoundary bc;
  bc.kind = {BoundaryKind::Dirichlet, BoundaryKind::Dirichlet, BoundaryKind::Neumann, BoundaryKind::Neumann};
  bc.value = {left, right, 0.0, 0.0};
  return bc;
}

bool DgBoundary::has_dirichlet() const noexcept {
  return std::find(kind.begin(), kind.end(), BoundaryKind::Dirichlet) != kind.end();
}

double default_sigma(const CoefficientField& A) { return 40.0 * A.beta0(); }

SipgParts assemble_sipg_parts(const UniformGrid& grid, std::span<const double> coef, double sigma,
                              const DgBoundary& bc) {
  check_sizes(grid, coef);
  if (!(sigma > 0.0)) throw ConfigError("SIPG penalty must be positive");
  const int n = kDgLocalDofs * grid.num_cells();
  const double h = grid.h();
  const auto& K = q1_stiffness_ref();

  std::vector<Triplet> vol;
  vol.reserve(static_cast<std::size_t>(16 * grid.num_cells()));
  for (int c = 0; c < grid.num_cells(); ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) vol.emplace_back(4 * c + a, 4 * c + b, coef[static_cast<std::size_t>(c)] * K[a][b]);

  std::vector<Triplet> cons, pen;
  for (const GridEdge& e : grid.edges()) {
    if (e.boundary() && bc.kind_of(e.side()) == BoundaryKind::Neumann) continue;
    for (double t : kGaussT) {
      const EdgePoint p = edge_point(e, coef, h, t);
      const double w = 0.5 * e.length;
      for (int a = 0; a < p.n; ++a)
        for (int b = 0; b < p.n; ++b) {
          cons.emplace_back(p.dof[a], p.dof[b], -w * (p.G[a] * p.J[b] + p.J[a] * p.G[b]));
          pen.emplace_back(p.dof[a], p.dof[b], w * sigma / e.length * p.J[a] * p.J[b]);
        }
    }
  }
  SipgParts parts;
  parts.volume = SparseMatrix(n, n);
  parts.volume.setFromTriplets(vol.begin(), vol.end());
  parts.consistency = SparseMatrix(n, n);
  parts.consistency.setFromTriplets(cons.begin(), cons.end());
  parts.penalty = SparseMatrix(n, n);
  parts.penalty.setFromTriplets(pen.begin(), pen.end());
  return parts;
}

SparseMatrix assemble_sipg(const UniformGrid& grid, std::span<const double> coef, double sigma,
                           const DgBoundary& bc) {
  SparseMatrix K = assemble_sipg_parts(grid, coef, sigma, bc).total();
  K.prune(0.0);
  return K;
}

void check_coercivity(const SparseMatrix& K, double sigma) {
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> llt(K);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "SIPG form is not positive definite for sigma = " << sigma << "; increase sigma";
    throw ConfigError(msg.str());
  }
}

SparseMatrix assemble_dg_mass(const UniformGrid& grid) {
  const auto M = q1_mass(grid.h());
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(16 * grid.num_cells()));
  for (int c = 0; c < grid.num_cells(); ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) t.emplace_back(4 * c + a, 4 * c + b, M[a][b]);
  const int n = kDgLocalDofs * grid.num_cells();
  SparseMatrix out(n, n);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

Vector assemble_dg_load(const UniformGrid& grid, std::span<const double> coef, double sigma,
                        const DgBoundary& bc, std::span<const double> q) {
  check_sizes(grid, coef);
  if (!q.empty() && q.size() != coef.size()) throw std::invalid_argument("source size does not match the grid");
  const double h = grid.h();
  Vector F = Vector::Zero(kDgLocalDofs * grid.num_cells());
  if (!q.empty())
    for (int c = 0; c < grid.num_cells(); ++c)
      for (int a = 0; a < 4; ++a) F[4 * c + a] += q[static_cast<std::size_t>(c)] * h * h / 4.0;
  for (const GridEdge& e : grid.edges()) {
    if (!e.boundary()) continue;
    const double g = bc.value_of(e.side());
    if (g == 0.0) continue;
    const bool dirichlet = bc.kind_of(e.side()) == BoundaryKind::Dirichlet;
    for (double t : kGaussT) {
      const EdgePoint p = edge_point(e, coef, h, t);
      const double w = 0.5 * e.length;
      for (int a = 0; a < p.n; ++a)
        F[p.dof[a]] += dirichlet ? w * g * (sigma / e.length * p.J[a] - p.G[a]) : w * g * p.val[a];
    }
  }
  return F;
}

SparseMatrix dg_prolongation(const TwoLevelMesh& mesh) {
  const UniformGrid& f = mesh.fine();
  const int r = mesh.ratio();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(16 * f.num_cells()));
  for (int c = 0; c < f.num_cells(); ++c) {
    const auto [i, j] = f.cell_ij(c);
    const int I = i / r, J = j / r;
    const int K = mesh.coarse().cell(I, J);
    for (int a = 0; a < 4; ++a) {
      const double x = static_cast<double>(i + (a & 1) - I * r) / r;
      const double y = static_cast<double>(j + (a >> 1) - J * r) / r;
      const double phi[4] = {(1 - x) * (1 - y), x * (1 - y), (1 - x) * y, x * y};
      for (int b = 0; b < 4; ++b)
        if (phi[b] != 0.0) t.emplace_back(4 * c + a, 4 * K + b, phi[b]);
    }
  }
  SparseMatrix P(kDgLocalDofs * f.num_cells(), kDgLocalDofs * mesh.num_coarse_cells());
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

DgFunction dg_l2_interp(const TwoLevelMesh& mesh, const DgFunction& v) {
  if (v.size() != kDgLocalDofs * mesh.num_fine_cells()) throw std::invalid_argument("DG function size mismatch");
  const SparseMatrix P = dg_prolongation(mesh);
  const Vector moments = P.transpose() * (assemble_dg_mass(mesh.fine()) * v);
  const auto MH = q1_mass(mesh.H());
  Eigen::Matrix4d M;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) M(a, b) = MH[a][b];
  const Eigen::LLT<Eigen::Matrix4d> llt(M);
  DgFunction out(kDgLocalDofs * mesh.num_coarse_cells());
  for (int K = 0; K < mesh.num_coarse_cells(); ++K) out.segment<4>(4 * K) = llt.solve(moments.segment<4>(4 * K));
  return out;
}

SourceFn dirichlet_lifting(const DgBoundary& bc) {
  auto dir = [&](Side s) { return bc.kind_of(s) == BoundaryKind::Dirichlet; };
  const bool l = dir(Side::Left), r = dir(Side::Right), b = dir(Side::Bottom), t = dir(Side::Top);
  const double L = bc.value_of(Side::Left), R = bc.value_of(Side::Right);
  const double B = bc.value_of(Side::Bottom), T = bc.value_of(Side::Top);
  const bool hx = l || r, hy = b || t;
  // linear blend across one direction, constant extension of a single side
  auto gx = [=](double x) { return l && r ? (1 - x) * L + x * R : (l ? L : R); };
  auto gy = [=](double y) { return b && t ? (1 - y) * B + y * T : (b ? B : T); };
  if (!hx && !hy) return [](double, double) { return 0.0; };
  if (!hy) return [=](double x, double) { return gx(x); };
  if (!hx) return [=](double, double y) { return gy(y); };
  // Coons patch; corner values are the side averages
  auto corner = [&](bool hi_x, bool hi_y) { return 0.5 * (gx(hi_x ? 1.0 : 0.0) + gy(hi_y ? 1.0 : 0.0)); };
  const double c00 = corner(false, false), c10 = corner(true, false);
  const double c01 = corner(false, true), c11 = corner(true, true);
  return [=](double x, double y) {
    const double bl = (1 - x) * (1 - y) * c00 + x * (1 - y) * c10 + (1 - x) * y * c01 + x * y * c11;
    return gx(x) + gy(y) - bl;
  };
}

DgFunction dg_interpolate(const UniformGrid& grid, const SourceFn& g) {
  DgFunction out(kDgLocalDofs * grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nodes = grid.cell_nodes(c);
    for (int a = 0; a < 4; ++a) {
      const auto x = grid.node_coord(nodes[a]);
      out[4 * c + a] = g(x[0], x[1]);
    }
  }
  return out;
}

DgFunction dg_from_nodal(const UniformGrid& grid, const Vector& nodal) {
  if (nodal.size() != grid.num_nodes()) throw std::invalid_argument("nodal vector size mismatch");
  DgFunction out(kDgLocalDofs * grid.num_cells());
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto nodes = grid.cell_nodes(c);
    for (int a = 0; a < 4; ++a) out[4 * c + a] = nodal[nodes[a]];
  }
  return out;
}

DgNorms dg_norms(const UniformGrid& grid, std::span<const double> coef, double sigma, const DgBoundary& bc,
                 const DgFunction& v) {
  const SipgParts parts = assemble_sipg_parts(grid, coef, sigma, bc);
  DgNorms n;
  n.l2 = std::sqrt(std::max(0.0, v.dot(assemble_dg_mass(grid) * v)));
  n.grad = std::sqrt(std::max(0.0, v.dot(parts.volume * v)));
  n.jump = std::sqrt(std::max(0.0, v.dot(parts.penalty * v)));
  return n;
}

DgFunction solve_dg_reference(const UniformGrid& grid, std::span<const double> coef, double sigma,
                              const DgBoundary& bc, std::span<const double> q, double rtol) {
  const SparseMatrix K = assemble_sipg(grid, coef, sigma, bc);
  const Vector F = assemble_dg_load(grid, coef, sigma, bc, q);
  try {
    return SpdSolver(K, rtol).solve(F);
  } catch (const SolverError& e) {
    std::ostringstream msg;
    msg << "fine SIPG solve failed for sigma = " << sigma << " (" << e.what() << "); increase sigma";
    throw ConfigError(msg.str());
  }
}

// ---------------------------------------------------------------------------
// DG LOD space

DgLodSpace::DgLodSpace(const TwoLevelMesh& mesh, const CoefficientField& A, double sigma, const DgBoundary& bc,
                       bool check)
    : mesh_(&mesh), sigma_(sigma), bc_(bc) {
  if (!bc.has_dirichlet()) throw ConfigError("DG problem needs at least one Dirichlet side");
  K_ = assemble_sipg(mesh.fine(), A.values(), sigma, bc);
  if (check) check_coercivity(K_, sigma);
  M_ = assemble_dg_mass(mesh.fine());
  P_ = dg_prolongation(mesh);
  KP_ = K_ * P_;
  C_ = SparseRowMatrix(SparseMatrix(P_.transpose()) * M_);
  C_.prune(0.0);
}

std::vector<int> DgLodSpace::patch_dofs(const Patch& patch) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(4 * patch.box.count()));
  for (int c : patch.fine_cells(mesh_->fine()))
    for (int a = 0; a < 4; ++a) out.push_back(4 * c + a);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> DgLodSpace::candidate_rows(const Patch& patch) const {
  const int r = mesh_->ratio();
  const int nc = mesh_->n_coarse();
  std::vector<int> out;
  for (int J = 0; J < nc; ++J) {
    if (!(J * r < patch.box.j1 && (J + 1) * r > patch.box.j0)) continue;
    for (int I = 0; I < nc; ++I) {
      if (!(I * r < patch.box.i1 && (I + 1) * r > patch.box.i0)) continue;
      const int K = mesh_->coarse().cell(I, J);
      for (int b = 0; b < 4; ++b) out.push_back(4 * K + b);
    }
  }
  return out;
}

std::vector<int> DgLodSpace::element_coarse_dofs(int T) const { return {4 * T, 4 * T + 1, 4 * T + 2, 4 * T + 3}; }

SparseVector DgLodSpace::element_load(int T, int coarse_dof) const {
  (void)T;
  return SparseVector(KP_.col(coarse_dof));
}

DgFunction solve_dg_lod(const SparseMatrix& K, const SparseMatrix& P, const CorrectorBasis& basis, const Vector& F,
                        const DgFunction& lifting, Variant variant, double rtol, MsSystem* system) {
  const Vector G = F - K * lifting;
  MsSystem sys = variant == Variant::PG ? assemble_pg(K, P, basis, G) : assemble_g(K, P, basis, G);
  const Vector c = solve_ms(sys, rtol);
  DgFunction u = reconstruct(P, basis, c) + lifting;
  if (system) *system = std::move(sys);
  return u;
}

CorrectorBasis dg_correctors(const TwoLevelMesh& mesh, const CoefficientField& A, double sigma,
                             const DgBoundary& bc, Layers k, const CorrectorOptions& options) {
  const DgLodSpace space(mesh, A, sigma, bc);
  return compute_correctors(space, k, options);
}

// ---------------------------------------------------------------------------
// fluxes

std::array<int, 4> FluxField::cell_edges(int cell) const {
  const auto [i, j] = grid.cell_ij(cell);
  return {grid.vertical_edge(i, j), grid.vertical_edge(i + 1, j), grid.horizontal_edge(i, j),
          grid.horizontal_edge(i, j + 1)};
}

double FluxField::outward(int cell, int e) const {
  const GridEdge& g = grid.edges()[static_cast<std::size_t>(e)];
  if (g.minus == cell) return edge_flux[static_cast<std::size_t>(e)];
  if (g.plus == cell) return -edge_flux[static_cast<std::size_t>(e)];
  throw std::invalid_argument("edge is not on the cell boundary");
}

double FluxField::max_relative_residual() const {
  double m = 0.0;
  for (double r : residual) m = std::max(m, std::abs(r));
  return scale > 0.0 ? m / scale : m;
}

FluxField extract_flux(const UniformGrid& fine, std::span<const double> coef, double sigma, const DgBoundary& bc,
                       const DgFunction& u, std::span<const double> q, const UniformGrid& target) {
  check_sizes(fine, coef);
  if (u.size() != kDgLocalDofs * fine.num_cells()) throw std::invalid_argument("DG function size mismatch");
  if (!q.empty() && q.size() != coef.size()) throw std::invalid_argument("source size does not match the grid");
  if (fine.n() % target.n() != 0) throw std::invalid_argument("target grid is not nested in the fine grid");
  const int r = fine.n() / target.n();
  const double h = fine.h();

  FluxField out;
  out.grid = target;
  out.edge_flux.assign(target.edges().size(), 0.0);
  out.residual.assign(static_cast<std::size_t>(target.num_cells()), 0.0);

  const auto& edges = fine.edges();
  for (int id = 0; id < static_cast<int>(edges.size()); ++id) {
    const GridEdge& e = edges[static_cast<std::size_t>(id)];
    int i, j;
    if (id < (fine.n() + 1) * fine.n()) {
      i = id % (fine.n() + 1);
      j = id / (fine.n() + 1);
      if (i % r != 0) continue;
    } else {
      const int k = id - (fine.n() + 1) * fine.n();
      i = k % fine.n();
      j = k / fine.n();
      if (j % r != 0) continue;
    }
    const int tid = e.axis == 0 ? target.vertical_edge(i / r, j / r) : target.horizontal_edge(i / r, j / r);

    double F = 0.0;
    if (e.boundary() && bc.kind_of(e.side()) == BoundaryKind::Neumann) {
      // prescribed A grad u . n_out = g, outward flux -g
      F = -boundary_geometry(e).sgn * bc.value_of(e.side()) * e.length;
    } else {
      const double g = e.boundary() ? bc.value_of(e.side()) : 0.0;
      const double sgn = e.boundary() ? boundary_geometry(e).sgn : 1.0;
      for (double t : kGaussT) {
        const EdgePoint p = edge_point(e, coef, h, t);
        double avg = 0.0, jump = 0.0;
        for (int a = 0; a < p.n; ++a) {
          avg += p.G[a] * u[p.dof[a]];
          jump += p.J[a] * u[p.dof[a]];
        }
        // boundary: G and J are oriented outward, flip back to +axis
        F += 0.5 * e.length * sgn * (-avg + sigma / e.length * (jump - g));
      }
    }
    out.edge_flux[static_cast<std::size_t>(tid)] += F;
  }

  double qabs = 0.0;
  if (!q.empty())
    for (int c = 0; c < fine.num_cells(); ++c) {
      const auto [i, j] = fine.cell_ij(c);
      const double qc = q[static_cast<std::size_t>(c)] * h * h;
      out.residual[static_cast<std::size_t>(target.cell(i / r, j / r))] -= qc;
      qabs += std::abs(qc);
    }
  for (int T = 0; T < target.num_cells(); ++T)
    for (int e : out.cell_edges(T)) out.residual[static_cast<std::size_t>(T)] += out.outward(T, e);

  double influx = 0.0;
  for (int id = 0; id < static_cast<int>(target.edges().size()); ++id) {
    const GridEdge& e = target.edges()[static_cast<std::size_t>(id)];
    if (!e.boundary()) continue;
    const double out_flux = boundary_geometry(e).sgn * out.edge_flux[static_cast<std::size_t>(id)];
    influx += std::max(0.0, -out_flux);
  }
  out.scale = qabs + influx;
  return out;
}

}  // namespace lodpg
