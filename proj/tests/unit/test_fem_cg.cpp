#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "lodpg/coefficients.hpp"
#include "lodpg/fem_cg.hpp"

using namespace lodpg;
using std::numbers::pi;

namespace {

FineFunction nodal(const TwoLevelMesh& m, const SourceFn& g) {
  FineFunction v(m.fine().num_nodes());
  for (int n = 0; n < m.fine().num_nodes(); ++n) {
    const auto x = m.fine().node_coord(n);
    v[n] = g(x[0], x[1]);
  }
  return v;
}

}  // namespace

TEST(Q1, ReferenceStiffness) {
  const auto& K = q1_stiffness_ref();
  for (int a = 0; a < 4; ++a) {
    double row = 0.0;
    for (int b = 0; b < 4; ++b) {
      row += K[a][b];
      EXPECT_DOUBLE_EQ(K[a][b], K[b][a]);
    }
    EXPECT_NEAR(row, 0.0, 1e-15);
    EXPECT_NEAR(K[a][a], 2.0 / 3.0, 1e-15);
  }
  EXPECT_NEAR(K[0][1], -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(K[0][2], -1.0 / 6.0, 1e-15);
  EXPECT_NEAR(K[0][3], -1.0 / 3.0, 1e-15);
}

TEST(Q1, MassSumsToArea) {
  const auto M = q1_mass(0.25);
  double s = 0.0;
  for (const auto& r : M)
    for (double v : r) s += v;
  EXPECT_NEAR(s, 0.0625, 1e-15);
  EXPECT_NEAR(M[0][0], 0.0625 / 9.0, 1e-15);
  EXPECT_NEAR(M[0][3], 0.0625 / 36.0, 1e-15);
}

TEST(Assembly, ConstantsInKernelAndUnitMass) {
  const TwoLevelMesh m = build_mesh(2, 4);
  const CoefficientField A = analytic_a_eps(m, 0.05);
  const SparseMatrix K = assemble_stiffness(m, A);
  const Vector one = Vector::Ones(K.rows());
  EXPECT_LT((K * one).norm(), 1e-12);
  const SparseMatrix M = assemble_mass(m);
  EXPECT_NEAR(one.dot(M * one), 1.0, 1e-13);
  std::vector<int> none;
  EXPECT_EQ(assemble_stiffness(m, A, none).nonZeros(), 0);
}

TEST(Assembly, RegionsAddUp) {
  const TwoLevelMesh m = build_mesh(2, 4);
  const CoefficientField A = analytic_a_eps(m, 0.05);
  SparseMatrix sum(m.fine().num_nodes(), m.fine().num_nodes());
  for (int T = 0; T < m.num_coarse_cells(); ++T) {
    const auto cells = m.fine_cells_of(T);
    sum += assemble_stiffness(m, A, cells);
  }
  // equal up to the order of floating-point summation
  const SparseMatrix K = assemble_stiffness(m, A);
  EXPECT_LE(DenseMatrix(sum - K).cwiseAbs().maxCoeff(), 4 * std::numeric_limits<double>::epsilon() * DenseMatrix(K).cwiseAbs().maxCoeff());
}

TEST(Assembly, ExactSymmetryAndCoercivity) {
  const TwoLevelMesh m = build_mesh(4, 4);
  const CoefficientField A = analytic_a_eps(m, 0.05);
  const SparseMatrix K = assemble_stiffness(m, A);
  EXPECT_EQ(DenseMatrix(K - SparseMatrix(K.transpose())).cwiseAbs().maxCoeff(), 0.0);
  const SparseMatrix L = assemble_stiffness(m, constant_field(m, 1.0));
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v(K.rows());
    for (int i = 0; i < v.size(); ++i) v[i] = u(rng);
    EXPECT_GE(v.dot(K * v), A.alpha0() * v.dot(L * v) * (1.0 - 1e-12));
  }
}

TEST(Reference, GalerkinOrthogonality) {
  const TwoLevelMesh m = build_mesh(4, 8);
  const CoefficientField A = analytic_a_eps(m, 0.05);
  const Vector F = assemble_load(m, [](double x, double) { return x - 0.5; });
  const FineFunction uh = solve_reference(m, A, F);
  const Vector r = restrict_to_interior(m, assemble_stiffness(m, A) * uh - F);
  EXPECT_LE(r.norm(), kDefaultRtol * F.norm());
}

TEST(Assembly, EnergyOfLinearFunction) {
  const TwoLevelMesh m = build_mesh(2, 4);
  const CoefficientField A = constant_field(m, 3.0);
  const FineFunction v = nodal(m, [](double x, double y) { return 2.0 * x - y; });
  // a(v, v) = 3 * |(2, -1)|^2
  EXPECT_NEAR(v.dot(assemble_stiffness(m, A) * v), 15.0, 1e-12);
}

TEST(Load, CellwiseConstantMatchesFunction) {
  const TwoLevelMesh m = build_mesh(2, 4);
  const std::vector<double> ones(static_cast<std::size_t>(m.num_fine_cells()), 1.0);
  const Vector a = assemble_load(m, ones);
  const Vector b = assemble_load(m, [](double, double) { return 1.0; });
  EXPECT_LT((a - b).norm(), 1e-15);
  for (int v = 0; v < m.fine().num_nodes(); ++v) {
    if (m.fine().on_boundary(v)) EXPECT_EQ(a[v], 0.0);
    else EXPECT_NEAR(a[v], m.h() * m.h(), 1e-15);
  }
}

TEST(Norms, ExactForBilinearFunctions) {
  const TwoLevelMesh m = build_mesh(2, 4);
  const CoefficientField A = constant_field(m, 2.0);
  const Norms nx = norms(m, A, nodal(m, [](double x, double) { return x; }));
  EXPECT_NEAR(nx.l2, std::sqrt(1.0 / 3.0), 1e-13);
  EXPECT_NEAR(nx.h1_semi, 1.0, 1e-13);
  EXPECT_NEAR(nx.h1, std::sqrt(4.0 / 3.0), 1e-13);
  EXPECT_NEAR(nx.energy, std::sqrt(2.0), 1e-13);
  const Norms nxy = norms(m, A, nodal(m, [](double x, double y) { return x * y; }));
  EXPECT_NEAR(nxy.l2, 1.0 / 3.0, 1e-13);
  EXPECT_NEAR(nxy.h1_semi, std::sqrt(2.0 / 3.0), 1e-13);
}

TEST(Norms, RelativeErrorsNeedNonzeroReference) {
  const TwoLevelMesh m = build_mesh(2, 4);
  const CoefficientField A = constant_field(m, 1.0);
  const FineFunction z = FineFunction::Zero(m.fine().num_nodes());
  EXPECT_THROW(relative_errors(m, A, z, z), std::domain_error);
  const FineFunction v = nodal(m, [](double x, double y) { return x * (1 - x) * y * (1 - y); });
  const RelativeErrors e = relative_errors(m, A, v, 0.5 * v);
  EXPECT_NEAR(e.l2, 0.5, 1e-13);
  EXPECT_NEAR(e.h1_semi, 0.5, 1e-13);
  EXPECT_NEAR(e.energy, 0.5, 1e-13);
}

TEST(Reference, ManufacturedSolutionConverges) {
  auto u = [](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); };
  auto f = [&](double x, double y) { return 2.0 * pi * pi * u(x, y); };
  std::vector<double> err;
  for (int ratio : {4, 8, 16}) {
    const TwoLevelMesh m = build_mesh(2, ratio);
    const CoefficientField A = constant_field(m, 1.0);
    const FineFunction uh = solve_reference(m, A, f);
    err.push_back(norms(m, A, uh - nodal(m, u)).l2);
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double rate = std::log2(err[i - 1] / err[i]);
    EXPECT_GT(rate, 1.8);
    EXPECT_LT(rate, 2.3);
  }
}

TEST(Prolongation, PartitionOfUnityAndLinearReproduction) {
  const TwoLevelMesh m = build_mesh(4, 4);
  const SparseMatrix P = prolongation(m);
  ASSERT_EQ(P.rows(), m.fine().num_nodes());
  ASSERT_EQ(P.cols(), m.coarse().num_nodes());
  const Vector one = P * Vector::Ones(P.cols());
  EXPECT_LT((one - Vector::Ones(P.rows())).norm(), 1e-13);
  CoarseFunction c(m.coarse().num_nodes());
  for (int v = 0; v < m.coarse().num_nodes(); ++v) {
    const auto x = m.coarse().node_coord(v);
    c[v] = 1.0 + 2.0 * x[0] - 3.0 * x[1] + x[0] * x[1];
  }
  const FineFunction f = prolong(m, c);
  // bilinear on each coarse cell, so x*y is reproduced too
  EXPECT_LT((f - nodal(m, [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y + x * y; })).norm(), 1e-12);
  const SparseMatrix Pi = prolongation_interior(m);
  EXPECT_EQ(Pi.rows(), m.num_interior_fine_nodes());
  EXPECT_EQ(Pi.cols(), m.num_interior_coarse_nodes());
}

TEST(Interior, RestrictExtendRoundTrip) {
  const TwoLevelMesh m = build_mesh(2, 4);
  FineFunction v = nodal(m, [](double x, double y) { return x * (1 - x) + y * (1 - y) * x; });
  for (int n = 0; n < m.fine().num_nodes(); ++n)
    if (m.fine().on_boundary(n)) v[n] = 0.0;
  EXPECT_LT((extend_from_interior(m, restrict_to_interior(m, v)) - v).norm(), 1e-15);
}
