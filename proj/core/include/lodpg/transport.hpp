#pragma once

#include <array>
#include <span>
#include <vector>

#include "lodpg/coefficients.hpp"
#include "lodpg/fem_dg.hpp"
#include "lodpg/lod.hpp"
#include "lodpg/mesh.hpp"

namespace lodpg {

/// Quadratic relative permeabilities k_w = s^2, k_n = (1 - s)^2.
struct MobilityModel {
  double mu_w = 1.0;
  double mu_n = 1.0;
};

struct Mobility {
  double lambda = 0.0;  ///< total mobility
  double f = 0.0;       ///< fractional flow of the wetting phase
};

/// Throws std::domain_error for s outside [0, 1] or non-positive viscosities.
Mobility mobility(double s, const MobilityModel& model);
double fractional_flow(double s, const MobilityModel& model);
double fractional_flow_derivative(double s, const MobilityModel& model);
/// max of f' over [0, 1] (sampled, then refined by golden-section search).
double max_fractional_flow_derivative(const MobilityModel& model);

/// Saturation per cell of some grid and the current time.
struct SaturationState {
  std::vector<double> s;
  double t = 0.0;
};

struct TransportParams {
  MobilityModel model;
  double porosity = 1.0;
  double cfl = 0.9;
  /// Saturation of fluid entering through each side (indexed by Side).
  std::array<double, 4> inflow_saturation{1.0, 0.0, 0.0, 0.0};
};

/// Volumes of the wetting phase moved by one step.
struct StepBalance {
  double injected = 0.0;
  double produced = 0.0;
  double source = 0.0;
  StepBalance& operator+=(const StepBalance& o) {
    injected += o.injected;
    produced += o.produced;
    source += o.source;
    return *this;
  }
};

struct StepResult {
  SaturationState state;
  StepBalance balance;
};

/// Largest stable step min_T cfl Theta |T| / (max f' sum_e |F_e|); infinite
/// for a cell without flux.
double cfl_limit(const FluxField& flux, const TransportParams& params);

/// One explicit upwind step with the donor cell chosen by the flux sign.
/// `q_w` holds the wetting source per cell (empty = none). Throws CflError
/// for dt above cfl_limit.
StepResult upwind_step(const SaturationState& state, const FluxField& flux, const TransportParams& params, double dt,
                       std::span<const double> q_w = {});

struct ImpesConfig {
  TransportParams transport;
  DgBoundary bc = DgBoundary::left_right(1.0, 0.0);
  double t_end = 0.25;
  int n_pressure = 10;
  int m_transport = 1;
  /// Split a transport step into equal substeps when it exceeds the CFL
  /// limit; otherwise such a step raises CflError.
  bool auto_substep = true;
  Layers k{1};
  /// SIPG penalty; 0 selects default_sigma of the permeability.
  double sigma = 0.0;
  double rtol = kDefaultRtol;
  CorrectorOptions correctors;
};

struct MassAudit {
  double injected = 0.0;
  double produced = 0.0;
  double source = 0.0;
  double initial = 0.0;  ///< Theta sum |T| s at t = 0
  double final = 0.0;
  /// |(final - initial) - (injected - produced + source)| relative to the
  /// largest of the volumes involved.
  double relative_defect() const;
};

struct ImpesResult {
  UniformGrid grid;  ///< grid carrying the saturation
  /// t = 0 and the state after every pressure step.
  std::vector<SaturationState> snapshots;
  /// Pressure after every pressure step (fine DG functions).
  std::vector<DgFunction> pressures;
  /// Largest relative conservation residual of every pressure solve.
  std::vector<double> conservation;
  /// Number of transport steps actually taken in every pressure step.
  std::vector<int> substeps;
  MassAudit audit;
  double min_s = 0.0;
  double max_s = 0.0;
};

/// Saturation on the coarse grid of `mesh`, pressure by the Petrov-Galerkin
/// DG-LOD. Correctors are computed once for lambda = 1; every pressure step
/// reassembles the coarse system with the coefficient K lambda(s_T).
ImpesResult impes_run(const TwoLevelMesh& mesh, const CoefficientField& K, const ImpesConfig& config,
                      bool keep_pressures = false);

/// Pressure (fine SIPG) and saturation both on the fine grid of `mesh`.
ImpesResult impes_reference(const TwoLevelMesh& mesh, const CoefficientField& K, const ImpesConfig& config,
                            bool keep_pressures = false);

/// Volume average of a cellwise field onto a nested coarser grid.
std::vector<double> average_to_coarse(const UniformGrid& fine, std::span<const double> values,
                                      const UniformGrid& coarse);

/// ||a - b|| / ||b|| over equally sized cells.
double relative_l2(std::span<const double> a, std::span<const double> b);

}  // namespace lodpg
