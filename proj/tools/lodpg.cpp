// lodpg: batch front end for the LOD experiments.
//
//   lodpg table     --config run.cfg --out out/
//   lodpg decay     --config run.cfg
//   lodpg infsup    --config run.cfg
//   lodpg reference --config run.cfg
//   lodpg impes     --config run.cfg --reference out/reference
//
// Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 inf-sup failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lodpg/config.hpp"
#include "lodpg/error.hpp"
#include "lodpg/experiments.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/fem_dg.hpp"

namespace fs = std::filesystem;
using namespace lodpg;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInfSup = 4;

struct Options {
  std::string config;
  std::string out;
  int threads = 0;
  bool store_correctors = false;
  bool log10 = false;
  std::string reference;
};

ExperimentConfig load(const Options& o) {
  ExperimentConfig c = ExperimentConfig::load(o.config);
  if (!o.out.empty()) c.output = o.out;
  if (o.threads > 0) c.threads = o.threads;
  if (o.store_correctors) c.store_correctors = true;
  if (o.log10) c.coefficient.log10 = true;
  if (!o.reference.empty()) c.reference_dir = o.reference;
  fs::create_directories(c.output);
  return c;
}

std::ofstream open(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  return out;
}

void log_line(const std::string& s) { std::cerr << "lodpg: " << s << '\n'; }

int cmd_table(const Options& o) {
  const ExperimentConfig c = load(o);
  const auto rows = run_convergence_table(c, log_line);
  auto out = open(c.output / "table.csv");
  write_table_csv(out, c, rows);
  write_table_csv(std::cout, c, rows);
  return 0;
}

int cmd_decay(const Options& o) {
  const ExperimentConfig c = load(o);
  const DecayResult d = run_decay_plot(c, log_line);
  auto csv = open(c.output / "decay.csv");
  write_decay_csv(csv, c, d);
  auto gp = open(c.output / "decay.gp");
  write_decay_script(gp, d, "decay.csv");
  write_decay_csv(std::cout, c, d);
  return 0;
}

int cmd_infsup(const Options& o) {
  const ExperimentConfig c = load(o);
  const auto rows = run_infsup_scan(c, log_line);
  auto out = open(c.output / "infsup.csv");
  write_infsup_csv(out, c, rows);
  write_infsup_csv(std::cout, c, rows);
  for (const auto& r : rows) {
    if (!(r.min_real > 0.0)) {
      log_line("non-positive spectrum for n_coarse " + std::to_string(r.n_coarse) + ", k " + r.k.str() + " (" +
               to_string(r.method) + ")");
      return kExitInfSup;
    }
  }
  return 0;
}

int cmd_reference(const Options& o) {
  const ExperimentConfig c = load(o);
  if (c.problem == ProblemKind::Impes) {
    const ImpesResult ref = run_impes_reference(c, log_line);
    write_snapshots(c.output / "reference", c, ref);
    log_line("wrote " + std::to_string(ref.snapshots.size()) + " snapshots to " + (c.output / "reference").string());
    return 0;
  }
  const int nc = c.n_coarse.front();
  const TwoLevelMesh mesh = build_mesh(nc, c.n_fine / nc);
  const CoefficientField A = c.coefficient.build(mesh);
  auto out = open(c.output / "reference.csv");
  out << csv_comment(c) << '\n';
  if (c.problem == ProblemKind::EllipticCg) {
    const FineFunction u = solve_reference(mesh, A, c.source(), c.rtol);
    out << "node,x,y,u\n";
    for (int v = 0; v < mesh.fine().num_nodes(); ++v) {
      const auto x = mesh.fine().node_coord(v);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%d,%.10e,%.10e,%.10e\n", v, x[0], x[1], u[v]);
      out << buf;
    }
  } else {
    const double sigma = c.sigma > 0.0 ? c.sigma : default_sigma(A);
    std::vector<double> q(static_cast<std::size_t>(mesh.num_fine_cells()));
    const SourceFn f = c.source();
    for (int cell = 0; cell < mesh.num_fine_cells(); ++cell) {
      const auto x = mesh.fine().cell_center(cell);
      q[static_cast<std::size_t>(cell)] = f(x[0], x[1]);
    }
    const DgFunction u = solve_dg_reference(mesh.fine(), A.values(), sigma, c.bc, q, c.rtol);
    out << "cell,corner,x,y,u\n";
    for (int cell = 0; cell < mesh.num_fine_cells(); ++cell) {
      const auto nodes = mesh.fine().cell_nodes(cell);
      for (int a = 0; a < kDgLocalDofs; ++a) {
        const auto x = mesh.fine().node_coord(nodes[static_cast<std::size_t>(a)]);
        char buf[112];
        std::snprintf(buf, sizeof buf, "%d,%d,%.10e,%.10e,%.10e\n", cell, a, x[0], x[1], u[4 * cell + a]);
        out << buf;
      }
    }
  }
  return 0;
}

int cmd_impes(const Options& o) {
  const ExperimentConfig c = load(o);
  ImpesResult ref;
  const bool have_ref = !c.reference_dir.empty();
  if (have_ref) ref = read_snapshots(c.reference_dir);
  const auto runs = run_impes(c, have_ref ? &ref : nullptr, log_line);
  for (const auto& r : runs) write_snapshots(c.output / "impes" / ("n" + std::to_string(r.n_coarse)), c, r.result);
  auto out = open(c.output / "impes_summary.csv");
  write_impes_summary_csv(out, c, runs);
  write_impes_summary_csv(std::cout, c, runs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized orthogonal decomposition experiments"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment configuration (key = value)")->required();
    sub->add_option("--out", o.out, "output directory (overrides 'output')");
    sub->add_option("--threads", o.threads, "worker threads for the corrector problems")->check(CLI::PositiveNumber);
    sub->add_flag("--store-correctors", o.store_correctors, "write every corrector under <out>/correctors");
    sub->add_flag("--log10", o.log10, "raster values are log10 of the coefficient");
  };
  int (*handler)(const Options&) = nullptr;
  auto add = [&](const char* name, const char* help, int (*fn)(const Options&)) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    sub->callback([&handler, fn] { handler = fn; });
    return sub;
  };
  add("table", "convergence table (errors per H and k)", cmd_table);
  add("decay", "error decay in k with a gnuplot script", cmd_decay);
  add("infsup", "smallest real part of the coarse spectra", cmd_infsup);
  add("reference", "fine-scale reference solution or IMPES run", cmd_reference);
  auto* impes = add("impes", "IMPES runs with the PG DG-LOD pressure", cmd_impes);
  impes->add_option("--reference", o.reference, "directory with reference snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    return handler(o);
  } catch (const ConfigError& e) {
    log_line(std::string("configuration error: ") + e.what());
    return kExitConfig;
  } catch (const InfSupError& e) {
    log_line(std::string("inf-sup failure: ") + e.what());
    return kExitInfSup;
  } catch (const SolverError& e) {
    log_line(std::string("solver failure: ") + e.what());
    return kExitSolver;
  } catch (const CflError& e) {
    log_line(std::string("solver failure: ") + e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    log_line(std::string("configuration error: ") + e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return kExitSolver;
  }
}
