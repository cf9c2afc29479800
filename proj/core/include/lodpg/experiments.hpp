#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "lodpg/config.hpp"
#include "lodpg/lod.hpp"
#include "lodpg/transport.hpp"

namespace lodpg {

/// Progress messages of the long-running drivers (nullptr = silent).
using Logger = std::function<void(const std::string&)>;

/// Relative errors of one LOD solution against the fine reference.
/// Continuous runs fill h1 (full norm) and h1_semi; DG runs fill dg.
struct MethodErrors {
  Method method = Method::PgLod;
  double eH_l2 = 0.0;  ///< coarse part (L2 projection onto V_H)
  double eh_l2 = 0.0;
  double eh_h1 = 0.0;
  double eh_h1_semi = 0.0;
  double eh_energy = 0.0;
  double eh_dg = 0.0;
  double infsup = 0.0;  ///< smallest real part of the coarse spectrum (when computed)
};

struct TableRow {
  int n_coarse = 0;
  Layers k;
  std::vector<MethodErrors> methods;
  const MethodErrors& get(Method m) const;
};

/// One row per (H, k) of the schedule, for elliptic-cg and elliptic-dg.
std::vector<TableRow> run_convergence_table(const ExperimentConfig& config, const Logger& log = {},
                                            bool with_infsup = false);

/// Errors ||e(k)|| - ||e(k_max)|| on the first coarse resolution.
struct DecayRow {
  Layers k;
  /// per method: L2 and H1 (or DG) differences, in the order of config.methods
  std::vector<double> l2;
  std::vector<double> energy;
};
struct DecayResult {
  int n_coarse = 0;
  std::vector<Method> methods;
  std::vector<TableRow> raw;
  std::vector<DecayRow> rows;
};
DecayResult run_decay_plot(const ExperimentConfig& config, const Logger& log = {});

struct InfSupRow {
  int n_coarse = 0;
  Layers k;
  Method method = Method::PgLod;
  double min_real = 0.0;
};
std::vector<InfSupRow> run_infsup_scan(const ExperimentConfig& config, const Logger& log = {});

struct ImpesRun {
  int n_coarse = 0;
  Layers k;
  ImpesResult result;
  /// Relative L2 error per snapshot against the reference (empty without one).
  std::vector<double> error;
};
/// Runs the reduced model for every n_coarse; when `reference` is non-null
/// its snapshots are averaged onto each coarse grid and compared.
std::vector<ImpesRun> run_impes(const ExperimentConfig& config, const ImpesResult* reference, const Logger& log = {});
/// Fine-grid IMPES run on the finest mesh of the configuration.
ImpesResult run_impes_reference(const ExperimentConfig& config, const Logger& log = {});

// ---------------------------------------------------------------------------
// output

/// `# config <hash>` comment line that starts every CSV.
std::string csv_comment(const ExperimentConfig& config);

void write_table_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<TableRow>& rows);
void write_decay_csv(std::ostream& out, const ExperimentConfig& config, const DecayResult& decay);
/// gnuplot script plotting the decay CSV on a log scale.
void write_decay_script(std::ostream& out, const DecayResult& decay, const std::string& csv_name);
void write_infsup_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<InfSupRow>& rows);
/// cell, x, y, s for one snapshot.
void write_snapshot_csv(std::ostream& out, const ExperimentConfig& config, const UniformGrid& grid,
                        const SaturationState& state);
SaturationState read_snapshot_csv(const std::filesystem::path& path);
void write_impes_summary_csv(std::ostream& out, const ExperimentConfig& config, const std::vector<ImpesRun>& runs);

/// Writes snapshot_<i>.csv files into `dir`.
void write_snapshots(const std::filesystem::path& dir, const ExperimentConfig& config, const ImpesResult& result);
/// Reads snapshot_<i>.csv files written by write_snapshots; the grid is
/// recovered from the cell count.
ImpesResult read_snapshots(const std::filesystem::path& dir);

}  // namespace lodpg
