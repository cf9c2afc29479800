#include "lodpg/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lodpg/error.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/fem_dg.hpp"
#include "lodpg/quasi_interp.hpp"

namespace lodpg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10e", v);
  return buf;
}

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::vector<Method> lod_methods(const ExperimentConfig& c) {
  std::vector<Method> out;
  for (Method m : c.methods)
    if (m != Method::Reference) out.push_back(m);
  if (out.empty()) throw ConfigError("no LOD method requested (g-lod, pg-lod)");
  return out;
}

Variant variant_of(Method m) { return m == Method::GLod ? Variant::G : Variant::PG; }

CorrectorOptions corrector_options(const ExperimentConfig& c, int nc, Layers k) {
  CorrectorOptions o;
  o.threads = c.threads;
  o.rtol = c.rtol;
  if (c.store_correctors) {
    std::string tag = k.str();
    std::replace(tag.begin(), tag.end(), '/', '_');
    o.cache_dir = c.output / "correctors" / ("n" + std::to_string(nc) + "_k" + tag);
  }
  return o;
}

double rel(double e, double r) { return r > 0.0 ? e / r : e; }

std::vector<TableRow> cg_rows(const ExperimentConfig& c, int nc, const Logger& log, bool with_infsup) {
  const TwoLevelMesh mesh = build_mesh(nc, c.n_fine / nc);
  const CoefficientField A = c.coefficient.build(mesh);
  const Vector F = assemble_load(mesh, c.source());
  const FineFunction uh = solve_reference(mesh, A, F, c.rtol);
  const CgLodSpace space(mesh, A);
  const Vector F0 = restrict_to_interior(mesh, F);
  std::vector<TableRow> rows;
  for (Layers k : c.schedule(nc)) {
    say(log, "n_coarse " + std::to_string(nc) + ", k " + k.str() + ": correctors");
    const CorrectorBasis basis = compute_correctors(space, k, corrector_options(c, nc, k));
    TableRow row{nc, k, {}};
    for (Method m : lod_methods(c)) {
      const MsSystem sys = variant_of(m) == Variant::PG ? assemble_pg(space, basis, F0) : assemble_g(space, basis, F0);
      MethodErrors e;
      e.method = m;
      if (with_infsup) e.infsup = infsup_diagnostic(sys);
      const Vector coarse = solve_ms(sys, c.rtol);
      const FineFunction u = extend_from_interior(mesh, reconstruct(space.prolongation(), basis, coarse));
      const FineFunction uH = prolong(mesh, l2_project_coarse(mesh, u, c.rtol));
      const RelativeErrors eH = relative_errors(mesh, A, uh, uH);
      const RelativeErrors eh = relative_errors(mesh, A, uh, u);
      e.eH_l2 = eH.l2;
      e.eh_l2 = eh.l2;
      e.eh_h1 = eh.h1;
      e.eh_h1_semi = eh.h1_semi;
      e.eh_energy = eh.energy;
      row.methods.push_back(e);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> cell_source(const UniformGrid& grid, const SourceFn& f) {
  std::vector<double> q(static_cast<std::size_t>(grid.num_cells()));
  for (int cidx = 0; cidx < grid.num_cells(); ++cidx) {
    const auto x = grid.cell_center(cidx);
    q[static_cast<std::size_t>(cidx)] = f(x[0], x[1]);
  }
  return q;
}

std::vector<TableRow> dg_rows(const ExperimentConfig& c, int nc, const Logger& log, bool with_infsup) {
  const TwoLevelMesh mesh = build_mesh(nc, c.n_fine / nc);
  const CoefficientField A = c.coefficient.build(mesh);
  const double sigma = c.sigma > 0.0 ? c.sigma : default_sigma(A);
  const std::vector<double> q = cell_source(mesh.fine(), c.source());
  const DgFunction uh = solve_dg_reference(mesh.fine(), A.values(), sigma, c.bc, q, c.rtol);
  const DgLodSpace space(mesh, A, sigma, c.bc, false);
  const Vector F = assemble_dg_load(mesh.fine(), A.values(), sigma, c.bc, q);
  const DgFunction lifting = dg_interpolate(mesh.fine(), dirichlet_lifting(c.bc));
  const SparseMatrix& M = space.mass();
  const SparseMatrix& K = space.stiffness();
  const double ref_l2 = std::sqrt(uh.dot(M * uh));
  const double ref_energy = std::sqrt(uh.dot(K * uh));
  const double ref_dg = dg_norms(mesh.fine(), A.values(), sigma, c.bc, uh).dg();

  std::vector<TableRow> rows;
  for (Layers k : c.schedule(nc)) {
    say(log, "n_coarse " + std::to_string(nc) + ", k " + k.str() + ": DG correctors");
    const CorrectorBasis basis = compute_correctors(space, k, corrector_options(c, nc, k));
    TableRow row{nc, k, {}};
    for (Method m : lod_methods(c)) {
      MsSystem sys;
      const DgFunction u = solve_dg_lod(K, space.prolongation(), basis, F, lifting, variant_of(m), c.rtol, &sys);
      MethodErrors e;
      e.method = m;
      if (with_infsup) e.infsup = infsup_diagnostic(sys);
      const DgFunction uH = space.prolongation() * dg_l2_interp(mesh, u);
      const Vector dH = uh - uH, dh = uh - u;
      e.eH_l2 = rel(std::sqrt(dH.dot(M * dH)), ref_l2);
      e.eh_l2 = rel(std::sqrt(dh.dot(M * dh)), ref_l2);
      e.eh_energy = rel(std::sqrt(std::max(0.0, dh.dot(K * dh))), ref_energy);
      e.eh_dg = rel(dg_norms(mesh.fine(), A.values(), sigma, c.bc, dh).dg(), ref_dg);
      row.methods.push_back(e);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string k_field(Layers k) { return k.str(); }

}  // namespace

const MethodErrors& TableRow::get(Method m) const {
  for (const auto& e : methods)
    if (e.method == m) return e;
  throw std::out_of_range(std::string("method not in row: ") + to_string(m));
}

std::vector<TableRow> run_convergence_table(const ExperimentConfig& config, const Logger& log, bool with_infsup) {
  if (config.problem == ProblemKind::Impes) throw ConfigError("convergence tables need an elliptic problem");
  std::vector<TableRow> rows;
  for (int nc : config.n_coarse) {
    auto part = config.problem == ProblemKind::EllipticCg ? cg_rows(config, nc, log, with_infsup)
                                                          : dg_rows(config, nc, log, with_infsup);
    for (auto& r : part) rows.push_back(std::move(r));
  }
  return rows;
}

DecayResult run_decay_plot(const ExperimentConfig& config, const Logger& log) {
  ExperimentConfig c = config;
  c.n_coarse = {config.n_coarse.front()};
  DecayResult d;
  d.n_coarse = c.n_coarse.front();
  d.methods = lod_methods(c);
  d.raw = run_convergence_table(c, log);
  if (d.raw.empty()) return d;
  const auto last = std::max_element(d.raw.begin(), d.raw.end(),
                                     [](const TableRow& a, const TableRow& b) { return a.k < b.k; });
  const bool dg = c.problem == ProblemKind::EllipticDg;
  for (const TableRow& r : d.raw) {
    DecayRow row{r.k, {}, {}};
    for (Method m : d.methods) {
      row.l2.push_back(r.get(m).eh_l2 - last->get(m).eh_l2);
      row.energy.push_back(dg ? r.get(m).eh_dg - last->get(m).eh_dg : r.get(m).eh_h1 - last->get(m).eh_h1);
    }
    d.rows.push_back(std::move(row));
  }
  return d;
}

std::vector<InfSupRow> run_infsup_scan(const ExperimentConfig& config, const Logger& log) {
  std::vector<InfSupRow> out;
  for (const TableRow& r : run_convergence_table(config, log, true))
    for (const MethodErrors& e : r.methods) out.push_back({r.n_coarse, r.k, e.method, e.infsup});
  return out;
}

ImpesResult run_impes_reference(const ExperimentConfig& config, const Logger& log) {
  if (config.problem != ProblemKind::Impes) throw ConfigError("reference runs need problem = impes");
  const int nc = config.n_coarse.front();
  const TwoLevelMesh mesh = build_mesh(nc, config.n_fine / nc);
  const CoefficientField K = config.coefficient.build(mesh);
  say(log, "fine reference run, n_fine " + std::to_string(config.n_fine));
  return impes_reference(mesh, K, config.impes(Layers(0)));
}

std::vector<ImpesRun> run_impes(const ExperimentConfig& config, const ImpesResult* reference, const Logger& log) {
  if (config.problem != ProblemKind::Impes) throw ConfigError("run_impes needs problem = impes");
  std::vector<ImpesRun> runs;
  for (int nc : config.n_coarse) {
    const TwoLevelMesh mesh = build_mesh(nc, config.n_fine / nc);
    const CoefficientField K = config.coefficient.build(mesh);
    const Layers k = config.schedule(nc).front();
    say(log, "IMPES n_coarse " + std::to_string(nc) + ", k " + k.str());
    ImpesConfig ic = config.impes(k);
    ic.correctors = corrector_options(config, nc, k);
    ImpesRun run{nc, k, impes_run(mesh, K, ic), {}};
    if (reference) {
      if (reference->snapshots.size() != run.result.snapshots.size()) {
        throw ConfigError("reference has " + std::to_string(reference->snapshots.size()) + " snapshots, run has " +
                          std::to_string(run.result.snapshots.size()));
      }
      for (std::size_t i = 0; i < run.result.snapshots.size(); ++i) {
        const SaturationState& rs = reference->snapshots[i];
        if (std::abs(rs.t - run.result.snapshots[i].t) > 1e-9 * std::max(1.0, config.t_end)) {
          throw ConfigError("reference snapshot times do not match the run");
        }
        const auto avg = average_to_coarse(reference->grid, rs.s, mesh.coarse());
        run.error.push_back(relative_l2(run.result.snapshots[i].s, avg));
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

// ---------------------------------------------------------------------------
// output

std::string csv_comment(const ExperimentConfig& config) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "# config %016" PRIx64, config.hash());
  return buf;
}

void write_table_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<TableRow>& rows) {
  const bool dg = config.problem == ProblemKind::EllipticDg;
  const auto methods = lod_methods(config);
  out << csv_comment(config) << '\n' << "H,k";
  for (Method m : methods) {
    const std::string p = m == Method::GLod ? "G" : "PG";
    out << ',' << p << "_eH_L2," << p << "_eh_L2," << p << (dg ? "_eh_DG" : "_eh_H1");
  }
  for (Method m : methods) {
    const std::string p = m == Method::GLod ? "G" : "PG";
    out << ',' << p << (dg ? "_eh_energy" : "_eh_H1semi");
  }
  out << '\n';
  for (const TableRow& r : rows) {
    out << num(1.0 / r.n_coarse) << ',' << k_field(r.k);
    for (Method m : methods) {
      const MethodErrors& e = r.get(m);
      out << ',' << num(e.eH_l2) << ',' << num(e.eh_l2) << ',' << num(dg ? e.eh_dg : e.eh_h1);
    }
    for (Method m : methods) out << ',' << num(dg ? r.get(m).eh_energy : r.get(m).eh_h1_semi);
    out << '\n';
  }
}

void write_decay_csv(std::ostream& out, const ExperimentConfig& config, const DecayResult& d) {
  const bool dg = config.problem == ProblemKind::EllipticDg;
  out << csv_comment(config) << '\n' << "k";
  for (Method m : d.methods) {
    const std::string p = m == Method::GLod ? "G" : "PG";
    out << ',' << p << "_L2," << p << (dg ? "_DG" : "_H1");
  }
  out << '\n';
  for (const DecayRow& r : d.rows) {
    out << num(r.k.value());
    for (std::size_t i = 0; i < d.methods.size(); ++i) out << ',' << num(r.l2[i]) << ',' << num(r.energy[i]);
    out << '\n';
  }
}

void write_decay_script(std::ostream& out, const DecayResult& d, const std::string& csv_name) {
  out << "set datafile separator ','\n"
      << "set logscale y\n"
      << "set xlabel 'k'\n"
      << "set ylabel '||e(k)|| - ||e(k_max)||'\n"
      << "set title 'error decay, H = 1/" << d.n_coarse << "'\n"
      << "set key top right\n"
      << "plot ";
  int col = 2;
  for (std::size_t i = 0; i < d.methods.size(); ++i) {
    const std::string p = d.methods[i] == Method::GLod ? "G-LOD" : "PG-LOD";
    if (i) out << ", \\\n     ";
    out << "'" << csv_name << "' using 1:" << col << " with linespoints title '" << p << " L2', \\\n"
        << "     '" << csv_name << "' using 1:" << col + 1 << " with linespoints title '" << p
        << " energy'";
    col += 2;
  }
  out << "\npause -1\n";
}

void write_infsup_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<InfSupRow>& rows) {
  out << csv_comment(config) << '\n' << "H,k,method,min_real_part\n";
  for (const auto& r : rows)
    out << num(1.0 / r.n_coarse) << ',' << k_field(r.k) << ',' << to_string(r.method) << ',' << num(r.min_real) << '\n';
}

void write_snapshot_csv(std::ostream& out, const ExperimentConfig& config, const UniformGrid& grid,
                        const SaturationState& state) {
  out << csv_comment(config) << '\n' << "# t = " << num(state.t) << '\n' << "cell,x,y,s\n";
  for (int c = 0; c < grid.num_cells(); ++c) {
    const auto x = grid.cell_center(c);
    out << c << ',' << num(x[0]) << ',' << num(x[1]) << ',' << num(state.s[static_cast<std::size_t>(c)]) << '\n';
  }
}

SaturationState read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open snapshot '" + path.string() + "'");
  SaturationState st;
  bool have_t = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# t = ", 0) == 0) {
      st.t = std::stod(line.substr(6));
      have_t = true;
      continue;
    }
    if (line[0] == '#' || line.rfind("cell", 0) == 0) continue;
    std::stringstream ss(line);
    std::string cell, x, y, s;
    if (!std::getline(ss, cell, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y, ',') ||
        !std::getline(ss, s)) {
      throw ConfigError("malformed snapshot line in '" + path.string() + "'");
    }
    if (std::stoul(cell) != st.s.size()) throw ConfigError("snapshot cells out of order in '" + path.string() + "'");
    st.s.push_back(std::stod(s));
  }
  if (!have_t) throw ConfigError("snapshot '" + path.string() + "' has no time stamp");
  return st;
}

void write_snapshots(const std::filesystem::path& dir, const ExperimentConfig& config, const ImpesResult& result) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    std::ofstream out(dir / ("snapshot_" + std::to_string(i) + ".csv"));
    if (!out) throw ConfigError("cannot write into '" + dir.string() + "'");
    write_snapshot_csv(out, config, result.grid, result.snapshots[i]);
  }
}

ImpesResult read_snapshots(const std::filesystem::path& dir) {
  ImpesResult res;
  for (int i = 0;; ++i) {
    const auto file = dir / ("snapshot_" + std::to_string(i) + ".csv");
    if (!std::filesystem::exists(file)) break;
    res.snapshots.push_back(read_snapshot_csv(file));
  }
  if (res.snapshots.empty()) throw ConfigError("no snapshot_0.csv in '" + dir.string() + "'");
  const auto cells = res.snapshots.front().s.size();
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(cells))));
  if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != cells) {
    throw ConfigError("snapshot cell count is not a square");
  }
  for (const auto& s : res.snapshots)
    if (s.s.size() != cells) throw ConfigError("snapshots of different sizes in '" + dir.string() + "'");
  res.grid = UniformGrid(n);
  return res;
}

void write_impes_summary_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<ImpesRun>& runs) {
  out << csv_comment(config) << '\n'
      << "H,k,snapshot,t,error,min_s,max_s,mass_defect,max_conservation_residual,transport_steps\n";
  for (const ImpesRun& r : runs) {
    const ImpesResult& res = r.result;
    double cons = 0.0;
    for (double v : res.conservation) cons = std::max(cons, v);
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
      const auto& s = res.snapshots[i].s;
      const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      out << num(1.0 / r.n_coarse) << ',' << k_field(r.k) << ',' << i << ',' << num(res.snapshots[i].t) << ','
          << (r.error.empty() ? std::string("nan") : num(r.error[i])) << ',' << num(*lo) << ',' << num(*hi) << ','
          << num(res.audit.relative_defect()) << ',' << num(cons) << ','
          << (i == 0 ? 0 : res.substeps[i - 1]) << '\n';
    }
  }
}

}  // namespace lodpg
