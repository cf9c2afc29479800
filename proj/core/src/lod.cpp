#include "lodpg/lod.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>

#include "lodpg/error.hpp"
#include "parallel.hpp"

namespace lodpg {

// ---------------------------------------------------------------------------
// CG space

CgLodSpace::CgLodSpace(const TwoLevelMesh& mesh, const CoefficientField& A)
    : mesh_(&mesh),
      A_(&A),
      K_(interior_block(mesh, assemble_stiffness(mesh, A))),
      M_(interior_block(mesh, assemble_mass(mesh))),
      P_(prolongation_interior(mesh)),
      constraints_(mesh) {}

std::vector<int> CgLodSpace::patch_dofs(const Patch& patch) const { return patch_interior_dofs(*mesh_, patch); }

std::vector<int> CgLodSpace::candidate_rows(const Patch& patch) const {
  return constraints_.candidate_nodes(patch);
}

std::vector<int> CgLodSpace::element_coarse_dofs(int T) const {
  std::vector<int> out;
  for (int v : mesh_->coarse().cell_nodes(T)) {
    const int z = mesh_->interior_coarse_index(v);
    if (z >= 0) out.push_back(z);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SparseVector CgLodSpace::element_load(int T, int coarse_dof) const {
  const TwoLevelMesh& m = *mesh_;
  const UniformGrid& f = m.fine();
  const auto [I, J] = m.coarse().node_ij(m.interior_coarse_nodes()[coarse_dof]);
  const double r = m.ratio();
  auto hat = [&](int v) {
    const auto [i, j] = f.node_ij(v);
    return std::max(0.0, 1.0 - std::abs(i / r - I)) * std::max(0.0, 1.0 - std::abs(j / r - J));
  };
  const auto& K = q1_stiffness_ref();
  std::map<int, double> acc;
  for (int c : m.fine_cells_of(T)) {
    const auto nodes = f.cell_nodes(c);
    double phi[4];
    for (int a = 0; a < 4; ++a) phi[a] = hat(nodes[a]);
    for (int a = 0; a < 4; ++a) {
      const int dof = m.interior_fine_index(nodes[a]);
      if (dof < 0) continue;
      double s = 0.0;
      for (int b = 0; b < 4; ++b) s += K[a][b] * phi[b];
      acc[dof] += (*A_)[c] * s;
    }
  }
  SparseVector out(num_fine_dofs());
  out.reserve(static_cast<int>(acc.size()));
  for (const auto& [dof, val] : acc) out.insertBack(dof) = val;
  return out;
}

// ---------------------------------------------------------------------------
// correctors

SparseMatrix CorrectorBasis::matrix() const {
  std::vector<Triplet> t;
  std::size_t nnz = 0;
  for (const auto& c : correctors) nnz += c.dofs.size();
  t.reserve(nnz);
  for (const auto& c : correctors)
    for (std::size_t j = 0; j < c.dofs.size(); ++j) {
      const double v = c.values[static_cast<int>(j)];
      if (v != 0.0) t.emplace_back(c.dofs[j], c.coarse_dof, v);
    }
  SparseMatrix Q(num_fine_dofs, num_coarse_dofs);
  Q.setFromTriplets(t.begin(), t.end());
  return Q;
}

namespace {

struct ElementResult {
  Patch patch;
  std::vector<int> dropped;
  std::vector<Corrector> correctors;
};

ElementResult solve_element(const LodSpace& space, int T, Layers k, double rtol) {
  ElementResult res;
  res.patch = make_patch(space.mesh(), T, k);
  const std::vector<int> dofs = space.patch_dofs(res.patch);
  const std::vector<int> coarse = space.element_coarse_dofs(T);
  const int n = static_cast<int>(dofs.size());

  if (n == 0) {
    for (int i : coarse) res.correctors.push_back({T, i, {}, Vector()});
    return res;
  }

  std::vector<int> local(static_cast<std::size_t>(space.num_fine_dofs()), -1);
  for (int a = 0; a < n; ++a) local[dofs[a]] = a;

  const SparseMatrix KU = restrict_matrix(space.stiffness(), dofs);
  const std::vector<int> rows = space.candidate_rows(res.patch);
  const SparseRowMatrix& C = space.constraints();
  std::vector<Triplet> t;
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    for (SparseRowMatrix::InnerIterator it(C, rows[r]); it; ++it) {
      const int l = local[it.col()];
      if (l >= 0) t.emplace_back(r, l, it.value());
    }
  SparseMatrix CU(static_cast<int>(rows.size()), n);
  CU.setFromTriplets(t.begin(), t.end());

  try {
    SaddleSolver solver(KU, CU, rtol);
    for (int d : solver.dropped_rows()) res.dropped.push_back(rows[d]);
    for (int i : coarse) {
      const SparseVector load = space.element_load(T, i);
      Vector b = Vector::Zero(n);
      for (SparseVector::InnerIterator it(load); it; ++it) {
        const int l = local[it.index()];
        if (l >= 0) b[l] = -it.value();
      }
      res.correctors.push_back({T, i, dofs, solver.solve(b).x});
    }
  } catch (const SolverError& e) {
    throw SolverError("corrector problem on element " + std::to_string(T) + " (k = " + k.str() +
                      "): " + e.what());
  }
  return res;
}

}  // namespace

void write_corrector(const std::filesystem::path& file, const Corrector& c, Layers k) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write corrector file '" + file.string() + "'");
  out << c.T << ' ' << c.coarse_dof << ' ' << k.str() << ' ' << c.dofs.size() << '\n'
      << std::setprecision(17);
  for (std::size_t j = 0; j < c.dofs.size(); ++j) out << c.dofs[j] << ' ' << c.values[static_cast<int>(j)] << '\n';
}

Corrector read_corrector(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open corrector file '" + file.string() + "'");
  Corrector c;
  std::string k;
  std::size_t n = 0;
  if (!(in >> c.T >> c.coarse_dof >> k >> n)) throw ConfigError("bad corrector header in '" + file.string() + "'");
  c.dofs.resize(n);
  c.values.resize(static_cast<int>(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (!(in >> c.dofs[j] >> c.values[static_cast<int>(j)])) {
      throw ConfigError("truncated corrector file '" + file.string() + "'");
    }
  }
  return c;
}

void for_each_corrector(const LodSpace& space, Layers k, const CorrectorOptions& options,
                        const CorrectorSink& sink) {
  const int nT = space.mesh().num_coarse_cells();
  const int threads = std::max(1, options.threads);
  if (!options.cache_dir.empty()) std::filesystem::create_directories(options.cache_dir);
  // blocks of `threads` elements are solved concurrently and handed to the
  // sink in element order
  for (int b = 0; b < nT; b += threads) {
    const int e = std::min(nT, b + threads);
    std::vector<ElementResult> block(static_cast<std::size_t>(e - b));
    detail::parallel_for(b, e, threads, [&](int T) {
      block[static_cast<std::size_t>(T - b)] = solve_element(space, T, k, options.rtol);
    });
    for (auto& r : block) {
      if (!options.cache_dir.empty()) {
        for (const auto& c : r.correctors) {
          write_corrector(options.cache_dir / ("T" + std::to_string(c.T) + "_i" + std::to_string(c.coarse_dof) + ".txt"),
                          c, k);
        }
      }
      sink(r.patch, r.dropped, std::move(r.correctors));
    }
  }
}

CorrectorBasis compute_correctors(const LodSpace& space, Layers k, const CorrectorOptions& options) {
  CorrectorBasis basis;
  basis.k = k;
  basis.num_fine_dofs = space.num_fine_dofs();
  basis.num_coarse_dofs = space.num_coarse_dofs();
  for_each_corrector(space, k, options,
                     [&](const Patch& p, const std::vector<int>& dropped, std::vector<Corrector>&& cs) {
                       basis.patches.push_back(p);
                       basis.dropped.push_back(dropped);
                       for (auto& c : cs) basis.correctors.push_back(std::move(c));
                     });
  return basis;
}

CorrectorBasis compute_correctors(const TwoLevelMesh& mesh, const CoefficientField& A, Layers k,
                                  const CorrectorOptions& options) {
  return compute_correctors(CgLodSpace(mesh, A), k, options);
}

// ---------------------------------------------------------------------------
// coarse systems

PgAccumulator::PgAccumulator(const SparseMatrix& K, const SparseMatrix& P)
    : K_(&K), P_(&P), KP_(K * P),
      acc_(static_cast<std::size_t>(P.cols()), 0.0),
      mark_(static_cast<std::size_t>(P.cols()), 0) {}

void PgAccumulator::add(const Corrector& c) {
  touched_.clear();
  for (std::size_t j = 0; j < c.dofs.size(); ++j) {
    const double q = c.values[static_cast<int>(j)];
    if (q == 0.0) continue;
    for (SparseRowMatrix::InnerIterator it(KP_, c.dofs[j]); it; ++it) {
      const auto col = static_cast<std::size_t>(it.col());
      if (!mark_[col]) {
        mark_[col] = 1;
        touched_.push_back(static_cast<int>(col));
      }
      acc_[col] += q * it.value();
    }
  }
  std::sort(touched_.begin(), touched_.end());
  for (int row : touched_) {
    const auto r = static_cast<std::size_t>(row);
    if (acc_[r] != 0.0) triplets_.emplace_back(row, c.coarse_dof, acc_[r]);
    acc_[r] = 0.0;
    mark_[r] = 0;
  }
}

MsSystem PgAccumulator::finish(const Vector& fine_load, Layers k) const {
  SparseMatrix S(P_->cols(), P_->cols());
  S.setFromTriplets(triplets_.begin(), triplets_.end());
  MsSystem sys;
  sys.matrix = SparseMatrix(P_->transpose() * SparseMatrix(KP_)) + S;
  sys.matrix.prune(0.0);
  sys.rhs = P_->transpose() * fine_load;
  sys.variant = Variant::PG;
  sys.k = k;
  return sys;
}

MsSystem assemble_pg(const SparseMatrix& K, const SparseMatrix& P, const CorrectorBasis& basis,
                     const Vector& fine_load) {
  PgAccumulator acc(K, P);
  for (const auto& c : basis.correctors) acc.add(c);
  return acc.finish(fine_load, basis.k);
}

MsSystem assemble_pg(const LodSpace& space, const CorrectorBasis& basis, const Vector& fine_load) {
  return assemble_pg(space.stiffness(), space.prolongation(), basis, fine_load);
}

MsSystem assemble_pg_streaming(const LodSpace& space, Layers k, const Vector& fine_load,
                               const CorrectorOptions& options) {
  PgAccumulator acc(space.stiffness(), space.prolongation());
  for_each_corrector(space, k, options, [&](const Patch&, const std::vector<int>&, std::vector<Corrector>&& cs) {
    for (const auto& c : cs) acc.add(c);
  });
  return acc.finish(fine_load, k);
}

MsSystem assemble_g(const SparseMatrix& K, const SparseMatrix& P, const CorrectorBasis& basis,
                    const Vector& fine_load) {
  const SparseMatrix B = P + basis.matrix();
  const SparseMatrix KB = K * B;
  MsSystem sys;
  sys.matrix = SparseMatrix(B.transpose()) * KB;
  sys.matrix.prune(0.0);
  sys.rhs = B.transpose() * fine_load;
  sys.variant = Variant::G;
  sys.k = basis.k;
  return sys;
}

MsSystem assemble_g(const LodSpace& space, const CorrectorBasis& basis, const Vector& fine_load) {
  return assemble_g(space.stiffness(), space.prolongation(), basis, fine_load);
}

Vector solve_ms(const MsSystem& system, double rtol) {
  try {
    return LuSolver(system.matrix, rtol).solve(system.rhs);
  } catch (const SolverError& e) {
    if (system.variant == Variant::PG) {
      throw InfSupError(std::string("Petrov-Galerkin LOD system is singular: ") + e.what());
    }
    throw;
  }
}

Vector reconstruct(const SparseMatrix& P, const CorrectorBasis& basis, const Vector& coarse) {
  Vector u = P * coarse;
  for (const auto& c : basis.correctors) {
    const double w = coarse[c.coarse_dof];
    if (w == 0.0) continue;
    for (std::size_t j = 0; j < c.dofs.size(); ++j) u[c.dofs[j]] += w * c.values[static_cast<int>(j)];
  }
  return u;
}

double infsup_diagnostic(const MsSystem& system) {
  const auto re = eig_real_parts(DenseMatrix(system.matrix));
  if (re.empty()) throw SolverError("inf-sup diagnostic on an empty system");
  return re.front();
}

// ---------------------------------------------------------------------------
// diagnostics

KernelProjector::KernelProjector(const SparseRowMatrix& C)
    : C_(C), gram_(SparseMatrix(C_ * SparseMatrix(C_.transpose()))) {}

Vector KernelProjector::project(const Vector& r) const {
  const Vector y = gram_.solve(Vector(C_ * r));
  return r - C_.transpose() * y;
}

namespace {

Vector random_vector(std::mt19937_64& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
  return v;
}

}  // namespace

double quasi_orthogonality(const LodSpace& space, const CorrectorBasis& basis, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  const SparseMatrix& K = space.stiffness();
  const SparseMatrix B = space.prolongation() + basis.matrix();
  const KernelProjector proj(space.constraints());
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector v = B * random_vector(rng, space.num_coarse_dofs());
    const Vector w = proj.project(random_vector(rng, space.num_fine_dofs()));
    const Vector Kw = K * w;
    const double num = std::abs(v.dot(Kw));
    const double den = std::sqrt(v.dot(K * v)) * std::sqrt(w.dot(Kw));
    if (den > 0.0) worst = std::max(worst, num / den);
  }
  return worst;
}

double fine_part_bound_check(const LodSpace& space, const CorrectorBasis& basis, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  const SparseMatrix& K = space.stiffness();
  const SparseMatrix& M = space.mass();
  const SparseMatrix Q = basis.matrix();
  const SparseMatrix& P = space.prolongation();
  const double H = space.mesh().H();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const Vector c = random_vector(rng, space.num_coarse_dofs());
    const Vector vf = Q * c;
    const Vector v = P * c + vf;
    const double en = std::sqrt(v.dot(K * v));
    if (en > 0.0) worst = std::max(worst, std::sqrt(vf.dot(M * vf)) / (H * en));
  }
  return worst;
}

}  // namespace lodpg
