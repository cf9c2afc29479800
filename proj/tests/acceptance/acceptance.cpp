// Acceptance suite. Prints one line per criterion:
//
//   criterion <n>: PASS|FAIL|SKIP  <details>
//
// Exit status 0 when every selected criterion passes, 1 on a failure, 77 when
// everything selected was skipped.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>

#include "lodpg/coefficients.hpp"
#include "lodpg/config.hpp"
#include "lodpg/error.hpp"
#include "lodpg/experiments.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/fem_dg.hpp"
#include "lodpg/lod.hpp"
#include "oracles.hpp"

using namespace lodpg;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Fail;
  std::string detail;
};

bool verbose = false;

void progress(const std::string& s) {
  if (verbose) std::cerr << "  .. " << s << '\n';
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentConfig config(const std::string& name) {
  return ExperimentConfig::load(std::string(LODPG_CONFIG_DIR) + "/" + name);
}

/// Published errors: G (eH L2, eh L2, eh H1), PG (eH L2, eh L2, eh H1).
using ErrorRow = std::array<double, 6>;
using PublishedTable = std::map<std::pair<int, std::string>, ErrorRow>;

const PublishedTable& table1_values() {
  static const PublishedTable t{
      {{4, "0"}, {0.3794, 0.3772, 0.6377, 0.3778, 0.3755, 0.6375}},
      {{4, "1"}, {0.2523, 0.1445, 0.3637, 0.2544, 0.1504, 0.3642}},
      {{8, "2"}, {0.1073, 0.0423, 0.1761, 0.1078, 0.0453, 0.1807}},
      {{16, "2"}, {0.0353, 0.0105, 0.0932, 0.0357, 0.0123, 0.0994}},
      {{16, "6"}, {0.0351, 0.0080, 0.0634, 0.0353, 0.0091, 0.0662}},
  };
  return t;
}

const PublishedTable& table2_values() {
  static const PublishedTable t{
      {{16, "3"}, {0.0380, 0.0087, 0.0726, 0.0382, 0.0099, 0.0753}},
  };
  return t;
}

ErrorRow measured(const TableRow& r) {
  const MethodErrors& g = r.get(Method::GLod);
  const MethodErrors& p = r.get(Method::PgLod);
  return {g.eH_l2, g.eh_l2, g.eh_h1, p.eH_l2, p.eh_l2, p.eh_h1};
}

Outcome compare_table(const std::vector<TableRow>& rows, const PublishedTable& published, double tol) {
  static const char* names[6] = {"G eH", "G eh", "G H1", "PG eH", "PG eh", "PG H1"};
  double worst = 0.0;
  std::string where;
  std::size_t matched = 0;
  for (const TableRow& r : rows) {
    auto it = published.find({r.n_coarse, r.k.str()});
    if (it == published.end()) continue;
    ++matched;
    const ErrorRow got = measured(r);
    for (int c = 0; c < 6; ++c) {
      const double d = std::abs(got[c] - it->second[c]) / it->second[c];
      if (d > worst) {
        worst = d;
        where = "H=1/" + std::to_string(r.n_coarse) + " k=" + r.k.str() + " " + names[c] + " " +
                fmt("%.4f", got[c]) + " vs " + fmt("%.4f", it->second[c]);
      }
    }
  }
  Outcome o;
  if (matched != published.size()) {
    o.detail = "only " + std::to_string(matched) + " of " + std::to_string(published.size()) + " rows computed";
    return o;
  }
  o.status = worst <= tol ? Status::Pass : Status::Fail;
  o.detail = std::to_string(matched) + " rows, largest deviation " + fmt("%.1f%%", 100 * worst) + " (" + where + ")";
  return o;
}

// 1 ------------------------------------------------------------------------
Outcome table1() {
  const ExperimentConfig c = config("table1.cfg");
  return compare_table(run_convergence_table(c, progress), table1_values(), 0.15);
}

// 2 ------------------------------------------------------------------------
Outcome table2() {
  ExperimentConfig c = config("table2.cfg");
  c.k = {Layers(3)};
  return compare_table(run_convergence_table(c, progress), table2_values(), 0.15);
}

// 3 ------------------------------------------------------------------------
Outcome h_convergence() {
  ExperimentConfig c = config("table1.cfg");
  c.k_override.clear();
  for (int nc : c.n_coarse) c.k_override[nc] = {Layers(nc)};
  const auto rows = run_convergence_table(c, progress);
  Outcome o;
  o.status = Status::Pass;
  for (Method m : {Method::GLod, Method::PgLod}) {
    std::vector<double> e;
    for (const TableRow& r : rows) e.push_back(r.get(m).eH_l2);
    o.detail += std::string(m == Method::GLod ? "G" : "PG") + " eH";
    for (double v : e) o.detail += " " + fmt("%.4f", v);
    o.detail += ", rates";
    for (std::size_t i = 1; i < e.size(); ++i) {
      const double rate = std::log2(e[i - 1] / e[i]);
      o.detail += " " + fmt("%.2f", rate);
      if (!(rate >= 0.8 && rate <= 1.8)) o.status = Status::Fail;
    }
    o.detail += "; ";
  }
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome k_decay() {
  const ExperimentConfig c = config("decay.cfg");
  const DecayResult d = run_decay_plot(c, progress);
  Outcome o;
  o.status = Status::Pass;
  std::vector<double> ks;
  for (const DecayRow& r : d.rows)
    if (r.k < Layers(3)) ks.push_back(r.k.value());
  if (ks.size() < 3) {
    o.status = Status::Fail;
    o.detail = "schedule needs at least three k below 3";
    return o;
  }
  for (std::size_t mi = 0; mi < d.methods.size(); ++mi) {
    for (int norm = 0; norm < 2; ++norm) {
      std::vector<double> y;
      for (const DecayRow& r : d.rows)
        if (r.k < Layers(3)) y.push_back(norm == 0 ? r.l2[mi] : r.energy[mi]);
      bool strict = true;
      for (std::size_t i = 1; i < y.size(); ++i) strict = strict && y[i] < y[i - 1];
      const bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
      double slope = 0.0, r2 = 0.0;
      if (positive) std::tie(slope, r2) = oracle::log_linear_fit(ks, y);
      const bool ok = strict && positive && slope < 0.0 && r2 >= 0.9;
      if (!ok) o.status = Status::Fail;
      o.detail += std::string(d.methods[mi] == Method::GLod ? "G" : "PG") + (norm == 0 ? " L2" : " H1") +
                  (strict ? "" : " not decreasing") + " slope " + fmt("%.2f", slope) + " R2 " + fmt("%.3f", r2) + "; ";
    }
  }
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome pg_close_to_g() {
  std::vector<TableRow> rows = run_convergence_table(config("table1.cfg"), progress);
  ExperimentConfig t2 = config("table2.cfg");
  t2.k = {Layers(1), Layers(2), Layers(3)};
  for (auto& r : run_convergence_table(t2, progress)) rows.push_back(std::move(r));
  Outcome o;
  o.status = Status::Pass;
  double worst = 0.0;
  int checked = 0;
  for (const TableRow& r : rows) {
    if (r.k < Layers(1)) continue;
    ++checked;
    const double ratio = r.get(Method::PgLod).eh_h1 / r.get(Method::GLod).eh_h1;
    worst = std::max(worst, ratio);
    if (ratio > 1.3) {
      o.status = Status::Fail;
      o.detail += "H=1/" + std::to_string(r.n_coarse) + " k=" + r.k.str() + " ratio " + fmt("%.3f", ratio) + "; ";
    }
  }
  o.detail += std::to_string(checked) + " rows, largest PG/G H1 ratio " + fmt("%.3f", worst);
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome global_identity() {
  const TwoLevelMesh mesh = build_mesh(4, 4);
  const CoefficientField A = analytic_a_eps(mesh, 0.05);
  const CgLodSpace space(mesh, A);
  const CorrectorBasis basis = compute_correctors(space, Layers(4));
  const Vector F = restrict_to_interior(mesh, assemble_load(mesh, [](double x, double) { return x - 0.5; }));
  const DenseMatrix pg(assemble_pg(space, basis, F).matrix), g(assemble_g(space, basis, F).matrix);
  const double diff = (pg - g).cwiseAbs().maxCoeff();
  const double gnorm = g.cwiseAbs().maxCoeff();
  const double qo = quasi_orthogonality(space, basis, 20, 7);
  Outcome o;
  o.status = diff <= 1e-9 * gnorm && qo <= 1e-10 ? Status::Pass : Status::Fail;
  o.detail = "max|S_PG - S_G| / max|S_G| = " + fmt("%.2e", diff / gnorm) + ", quasi-orthogonality " + fmt("%.2e", qo);
  return o;
}

// 7 ------------------------------------------------------------------------
Outcome oracle_equivalence() {
  Outcome o;
  o.status = Status::Pass;
  for (int nc : {2, 4}) {
    const TwoLevelMesh mesh = build_mesh(nc, 4);
    const CoefficientField A = analytic_a_eps(mesh, 0.05);
    const CgLodSpace space(mesh, A);
    const CorrectorBasis basis = compute_correctors(space, Layers(nc));
    const DenseMatrix K(space.stiffness());
    const DenseMatrix C(SparseMatrix(space.constraints()));
    const DenseMatrix N = oracle::null_space(C);
    const Eigen::LLT<DenseMatrix> R(N.transpose() * K * N);
    double worst = 0.0;
    for (const Corrector& c : basis.correctors) {
      const Vector load = oracle::cg_element_load(mesh, A, c.T, c.coarse_dof);
      const Vector ref = N * R.solve(N.transpose() * (-load));
      Vector got = Vector::Zero(basis.num_fine_dofs);
      for (std::size_t i = 0; i < c.dofs.size(); ++i) got[c.dofs[i]] = c.values[static_cast<Eigen::Index>(i)];
      const double err = (got - ref).lpNorm<Eigen::Infinity>() / std::max(1.0, ref.lpNorm<Eigen::Infinity>());
      worst = std::max(worst, err);
    }
    if (worst > 1e-10) o.status = Status::Fail;
    o.detail += "(" + std::to_string(nc) + ",4): " + std::to_string(basis.correctors.size()) +
                " correctors, max error " + fmt("%.2e", worst) + "; ";
  }
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome infsup() {
  ExperimentConfig cg = config("table1.cfg");
  cg.methods = {Method::PgLod};
  std::vector<InfSupRow> rows = run_infsup_scan(cg, progress);
  ExperimentConfig dg = config("dg_infsup.cfg");
  for (auto& r : run_infsup_scan(dg, progress)) rows.push_back(r);
  Outcome o;
  o.status = Status::Pass;
  double smallest = 1e300;
  for (const InfSupRow& r : rows) {
    smallest = std::min(smallest, r.min_real);
    if (!(r.min_real > 0.0)) {
      o.status = Status::Fail;
      o.detail += "H=1/" + std::to_string(r.n_coarse) + " k=" + r.k.str() + " min Re " + fmt("%.3e", r.min_real) + "; ";
    }
  }
  const InfSupRow& d = rows.back();
  o.detail += std::to_string(rows.size()) + " systems, smallest min Re " + fmt("%.3e", smallest) + ", DG (k=" +
              d.k.str() + ") " + fmt("%.3e", d.min_real);

  // shorter DG patches, reported only
  dg.k_auto = false;
  dg.k = {Layers(1), Layers(2)};
  o.detail += "; not asserted:";
  for (const InfSupRow& r : run_infsup_scan(dg, progress)) o.detail += " DG k=" + r.k.str() + " " + fmt("%.3e", r.min_real);
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome dg_conservation() {
  ExperimentConfig c = config("impes.cfg");
  c.n_fine = 64;
  c.n_coarse = {16};
  c.validate();
  Outcome o;
  o.status = Status::Pass;

  // every pressure solve of an IMPES run
  const auto runs = run_impes(c, nullptr, progress);
  const auto& cons = runs.front().result.conservation;
  const double worst_pg = *std::max_element(cons.begin(), cons.end());
  if (!(worst_pg <= 1e-9)) o.status = Status::Fail;
  o.detail = std::to_string(cons.size()) + " IMPES pressure solves, max residual " + fmt("%.2e", worst_pg);

  // same elliptic problem with PG and G
  const TwoLevelMesh mesh = build_mesh(16, 4);
  const CoefficientField K = c.coefficient.build(mesh);
  const double sigma = default_sigma(K);
  const DgLodSpace space(mesh, K, sigma, c.bc);
  const CorrectorBasis basis = compute_correctors(space, c.schedule(16).front());
  const std::vector<double> q(static_cast<std::size_t>(mesh.num_fine_cells()), 0.0);
  const Vector F = assemble_dg_load(mesh.fine(), K.values(), sigma, c.bc, q);
  const DgFunction lift = dg_interpolate(mesh.fine(), dirichlet_lifting(c.bc));
  double res[2];
  for (int v = 0; v < 2; ++v) {
    const DgFunction u = solve_dg_lod(space.stiffness(), space.prolongation(), basis, F, lift,
                                      v == 0 ? Variant::PG : Variant::G);
    res[v] = extract_flux(mesh.fine(), K.values(), sigma, c.bc, u, q, mesh.coarse()).max_relative_residual();
  }
  if (!(res[0] <= 1e-9) || !(res[1] >= 1e-3)) o.status = Status::Fail;
  o.detail += "; elliptic PG " + fmt("%.2e", res[0]) + ", G (negative control) " + fmt("%.2e", res[1]);
  return o;
}

// 10 -----------------------------------------------------------------------
Outcome transport() {
  const ExperimentConfig c = config("impes.cfg");
  const ImpesResult ref = run_impes_reference(c, progress);
  const auto runs = run_impes(c, &ref, progress);
  Outcome o;
  o.status = Status::Pass;
  auto check_run = [&](const ImpesResult& r, const std::string& name) {
    const bool bounds = r.min_s >= 0.0 && r.max_s <= 1.0;
    const double defect = r.audit.relative_defect();
    if (!bounds || !(defect <= 1e-10)) o.status = Status::Fail;
    if (r.snapshots.size() != static_cast<std::size_t>(c.n_pressure) + 1) o.status = Status::Fail;
    o.detail += name + " s in [" + fmt("%.3g", r.min_s) + ", " + fmt("%.6g", r.max_s) + "] mass " +
                fmt("%.1e", defect) + "; ";
  };
  check_run(ref, "reference");
  std::vector<double> err;
  for (const ImpesRun& r : runs) {
    check_run(r.result, "H=1/" + std::to_string(r.n_coarse));
    err.push_back(r.error.back());
  }
  o.detail += "errors at t_end";
  for (double e : err) o.detail += " " + fmt("%.3f", e);
  for (std::size_t i = 1; i < err.size(); ++i)
    if (!(err[i] < err[i - 1])) o.status = Status::Fail;
  return o;
}

// 11 -----------------------------------------------------------------------
Outcome spe_layers() {
  const char* k1 = std::getenv("LODPG_SPE_K1");
  const char* k2 = std::getenv("LODPG_SPE_K2");
  Outcome o;
  if (!k1 || !k2) {
    o.status = Status::Skip;
    o.detail = "set LODPG_SPE_K1 and LODPG_SPE_K2 to raster files of the two permeability layers";
    return o;
  }
  const char* log_env = std::getenv("LODPG_SPE_LOG10");
  const bool log10 = log_env && std::string(log_env) == "1";
  static const double published[2][3] = {{0.088, 0.073, 0.070}, {0.058, 0.087, 0.079}};
  o.status = Status::Pass;
  double worst = 0.0;
  const char* files[2] = {k1, k2};
  for (int layer = 0; layer < 2; ++layer) {
    std::istringstream in("problem = impes\nn_fine = 256\nn_coarse = 32\nk = auto\nbc = left-right\n"
                          "bc_left = 1\nbc_right = 0\nt_end = 0.45\nn_pressure = 9\n");
    ExperimentConfig c = ExperimentConfig::parse(in, "spe");
    c.coefficient.kind = CoefficientSpec::Kind::Raster;
    c.coefficient.raster = files[layer];
    c.coefficient.log10 = log10;
    const ImpesResult ref = run_impes_reference(c, progress);
    const auto runs = run_impes(c, &ref, progress);
    const auto& e = runs.front().error;
    // snapshots every 0.05: t = 0.05, 0.25, 0.45 are entries 1, 5, 9
    const double got[3] = {e[1], e[5], e[9]};
    o.detail += std::string("K") + std::to_string(layer + 1);
    for (int i = 0; i < 3; ++i) {
      const double d = std::abs(got[i] - published[layer][i]) / published[layer][i];
      worst = std::max(worst, d);
      o.detail += " " + fmt("%.3f", got[i]);
    }
    o.detail += "; ";
  }
  if (worst > 0.25) o.status = Status::Fail;
  o.detail += "largest deviation " + fmt("%.1f%%", 100 * worst);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lodpg acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 11));
  app.add_flag("-v,--verbose", verbose, "progress messages on stderr");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, table1},          {2, table2},           {3, h_convergence},   {4, k_decay},
      {5, pg_close_to_g},   {6, global_identity},  {7, oracle_equivalence}, {8, infsup},
      {9, dg_conservation}, {10, transport},       {11, spe_layers},
  };
  int passed = 0, failed = 0, skipped = 0;
  for (const auto& [id, fn] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.status = Status::Fail;
      o.detail = std::string("exception: ") + e.what();
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Skip ? "SKIP" : "FAIL";
    std::cout << "criterion " << id << ": " << tag << "  " << o.detail << std::endl;
    (o.status == Status::Pass ? passed : o.status == Status::Skip ? skipped : failed)++;
  }
  if (failed > 0) return 1;
  if (passed == 0 && skipped > 0) return 77;
  return 0;
}
