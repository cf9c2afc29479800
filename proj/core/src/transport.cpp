#include "lodpg/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lodpg/error.hpp"

namespace lodpg {

namespace {

void check_model(const MobilityModel& m) {
  if (!(m.mu_w > 0.0) || !(m.mu_n > 0.0)) throw std::domain_error("viscosities must be positive");
}

void check_saturation(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    std::ostringstream msg;
    msg << "saturation " << s << " outside [0, 1]";
    throw std::domain_error(msg.str());
  }
}

}  // namespace

Mobility mobility(double s, const MobilityModel& model) {
  check_model(model);
  check_saturation(s);
  const double kw = s * s / model.mu_w;
  const double kn = (1.0 - s) * (1.0 - s) / model.mu_n;
  return {kw + kn, kw / (kw + kn)};
}

double fractional_flow(double s, const MobilityModel& model) { return mobility(s, model).f; }

double fractional_flow_derivative(double s, const MobilityModel& model) {
  check_model(model);
  check_saturation(s);
  const double a = s * s / model.mu_w, da = 2.0 * s / model.mu_w;
  const double b = (1.0 - s) * (1.0 - s) / model.mu_n, db = -2.0 * (1.0 - s) / model.mu_n;
  return (da * b - a * db) / ((a + b) * (a + b));
}

double max_fractional_flow_derivative(const MobilityModel& model) {
  constexpr int kSamples = 2048;
  auto d = [&](double s) { return fractional_flow_derivative(s, model); };
  int best = 0;
  double best_val = d(0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double v = d(static_cast<double>(i) / kSamples);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double lo = std::max(0, best - 1) / static_cast<double>(kSamples);
  double hi = std::min(kSamples, best + 1) / static_cast<double>(kSamples);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 80; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (d(x1) < d(x2)) lo = x1;
    else hi = x2;
  }
  return std::max(best_val, d(0.5 * (lo + hi)));
}

double cfl_limit(const FluxField& flux, const TransportParams& params) {
  const double df = max_fractional_flow_derivative(params.model);
  const double area = flux.grid.h() * flux.grid.h();
  double limit = std::numeric_limits<double>::infinity();
  for (int T = 0; T < flux.grid.num_cells(); ++T) {
    double sum = 0.0;
    for (int e : flux.cell_edges(T)) sum += std::abs(flux.edge_flux[static_cast<std::size_t>(e)]);
    if (sum > 0.0) limit = std::min(limit, params.cfl * params.porosity * area / (df * sum));
  }
  return limit;
}

StepResult upwind_step(const SaturationState& state, const FluxField& flux, const TransportParams& params, double dt,
                       std::span<const double> q_w) {
  const UniformGrid& grid = flux.grid;
  const auto nT = static_cast<std::size_t>(grid.num_cells());
  if (state.s.size() != nT) throw std::invalid_argument("saturation size does not match the flux grid");
  if (!q_w.empty() && q_w.size() != nT) throw std::invalid_argument("source size does not match the flux grid");
  if (dt < 0.0) throw std::invalid_argument("negative time step");
  const double limit = cfl_limit(flux, params);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "transport step " << dt << " exceeds the CFL limit " << limit;
    throw CflError(msg.str(), limit);
  }

  const MobilityModel& model = params.model;
  const double area = grid.h() * grid.h();
  std::vector<double> delta(nT, 0.0);  // wetting inflow rate per cell
  StepResult out;
  const auto& edges = grid.edges();
  for (std::size_t id = 0; id < edges.size(); ++id) {
    const GridEdge& e = edges[id];
    const double F = flux.edge_flux[id];
    if (F == 0.0) continue;
    if (!e.boundary()) {
      const int donor = F > 0.0 ? e.minus : e.plus;
      const double w = fractional_flow(state.s[static_cast<std::size_t>(donor)], model) * F;
      delta[static_cast<std::size_t>(e.minus)] -= w;
      delta[static_cast<std::size_t>(e.plus)] += w;
      continue;
    }
    const int cell = e.minus >= 0 ? e.minus : e.plus;
    const double out_flux = e.minus >= 0 ? F : -F;
    if (out_flux > 0.0) {
      const double w = fractional_flow(state.s[static_cast<std::size_t>(cell)], model) * out_flux;
      delta[static_cast<std::size_t>(cell)] -= w;
      out.balance.produced += dt * w;
    } else {
      const double w = fractional_flow(params.inflow_saturation[static_cast<int>(e.side())], model) * -out_flux;
      delta[static_cast<std::size_t>(cell)] += w;
      out.balance.injected += dt * w;
    }
  }
  out.state.s.resize(nT);
  out.state.t = state.t + dt;
  for (std::size_t T = 0; T < nT; ++T) {
    double rate = delta[T];
    if (!q_w.empty()) {
      rate += q_w[T] * area;
      out.balance.source += dt * q_w[T] * area;
    }
    out.state.s[T] = state.s[T] + dt / (params.porosity * area) * rate;
  }
  return out;
}

double MassAudit::relative_defect() const {
  const double change = final - initial;
  const double scale = std::max({std::abs(change), injected, produced, std::abs(source)});
  const double defect = std::abs(change - (injected - produced + source));
  return scale > 0.0 ? defect / scale : defect;
}

std::vector<double> average_to_coarse(const UniformGrid& fine, std::span<const double> values,
                                      const UniformGrid& coarse) {
  if (values.size() != static_cast<std::size_t>(fine.num_cells())) throw std::invalid_argument("size mismatch");
  if (fine.n() % coarse.n() != 0) throw std::invalid_argument("coarse grid is not nested in the fine grid");
  const int r = fine.n() / coarse.n();
  std::vector<double> out(static_cast<std::size_t>(coarse.num_cells()), 0.0);
  for (int c = 0; c < fine.num_cells(); ++c) {
    const auto [i, j] = fine.cell_ij(c);
    out[static_cast<std::size_t>(coarse.cell(i / r, j / r))] += values[static_cast<std::size_t>(c)];
  }
  for (double& v : out) v /= static_cast<double>(r * r);
  return out;
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

namespace {

/// Maps a per-cell total mobility onto the fine coefficient and returns the
/// resulting flux on the saturation grid.
using PressureStep = std::function<FluxField(const std::vector<double>& coef, DgFunction* pressure)>;

ImpesResult run_loop(const UniformGrid& sat_grid, const TwoLevelMesh& mesh, const CoefficientField& K,
                     const ImpesConfig& cfg, const PressureStep& pressure, bool keep_pressures) {
  if (cfg.n_pressure < 1 || cfg.m_transport < 1) throw ConfigError("step counts must be at least 1");
  if (!(cfg.t_end >= 0.0)) throw ConfigError("end time must be nonnegative");
  const UniformGrid& fine = mesh.fine();
  const int r = fine.n() / sat_grid.n();
  const double cell_volume = cfg.transport.porosity * sat_grid.h() * sat_grid.h();

  ImpesResult res;
  res.grid = sat_grid;
  SaturationState state;
  state.s.assign(static_cast<std::size_t>(sat_grid.num_cells()), 0.0);
  res.snapshots.push_back(state);
  for (double s : state.s) res.audit.initial += cell_volume * s;
  res.min_s = res.max_s = 0.0;

  if (cfg.t_end > 0.0) {
    const double dt = cfg.t_end / (static_cast<double>(cfg.n_pressure) * cfg.m_transport);
    std::vector<double> coef(static_cast<std::size_t>(fine.num_cells()));
    for (int step = 0; step < cfg.n_pressure; ++step) {
      for (int c = 0; c < fine.num_cells(); ++c) {
        const auto [i, j] = fine.cell_ij(c);
        const double s = state.s[static_cast<std::size_t>(sat_grid.cell(i / r, j / r))];
        coef[static_cast<std::size_t>(c)] = K[c] * mobility(s, cfg.transport.model).lambda;
      }
      DgFunction p;
      const FluxField flux = pressure(coef, keep_pressures ? &p : nullptr);
      res.conservation.push_back(flux.max_relative_residual());
      if (keep_pressures) res.pressures.push_back(std::move(p));

      const double limit = cfl_limit(flux, cfg.transport);
      int pieces = 1;
      if (dt > limit) {
        if (!cfg.auto_substep) {
          std::ostringstream msg;
          msg << "transport step " << dt << " exceeds the CFL limit " << limit;
          throw CflError(msg.str(), limit);
        }
        pieces = static_cast<int>(std::ceil(dt / limit));
      }
      int taken = 0;
      for (int m = 0; m < cfg.m_transport; ++m)
        for (int piece = 0; piece < pieces; ++piece) {
          StepResult next = upwind_step(state, flux, cfg.transport, dt / pieces);
          res.audit.injected += next.balance.injected;
          res.audit.produced += next.balance.produced;
          res.audit.source += next.balance.source;
          state = std::move(next.state);
          ++taken;
          for (double s : state.s) {
            res.min_s = std::min(res.min_s, s);
            res.max_s = std::max(res.max_s, s);
          }
        }
      // the nominal time avoids drift from summing substeps
      state.t = cfg.t_end * (step + 1) / cfg.n_pressure;
      res.substeps.push_back(taken);
      res.snapshots.push_back(state);
    }
  }
  for (double s : state.s) res.audit.final += cell_volume * s;
  return res;
}

double resolve_sigma(const ImpesConfig& cfg, const CoefficientField& K) {
  return cfg.sigma > 0.0 ? cfg.sigma : default_sigma(K);
}

}  // namespace

ImpesResult impes_run(const TwoLevelMesh& mesh, const CoefficientField& K, const ImpesConfig& config,
                      bool keep_pressures) {
  const double sigma = resolve_sigma(config, K);
  const DgLodSpace space(mesh, K, sigma, config.bc);
  const CorrectorBasis basis =
      config.t_end > 0.0 ? compute_correctors(space, config.k, config.correctors) : CorrectorBasis{};
  const DgFunction lifting = dg_interpolate(mesh.fine(), dirichlet_lifting(config.bc));
  const SparseMatrix& P = space.prolongation();

  auto pressure = [&](const std::vector<double>& coef, DgFunction* keep) {
    const SparseMatrix Kl = assemble_sipg(mesh.fine(), coef, sigma, config.bc);
    const Vector F = assemble_dg_load(mesh.fine(), coef, sigma, config.bc, {});
    DgFunction u = solve_dg_lod(Kl, P, basis, F, lifting, Variant::PG, config.rtol);
    FluxField flux = extract_flux(mesh.fine(), coef, sigma, config.bc, u, {}, mesh.coarse());
    if (keep) *keep = std::move(u);
    return flux;
  };
  return run_loop(mesh.coarse(), mesh, K, config, pressure, keep_pressures);
}

ImpesResult impes_reference(const TwoLevelMesh& mesh, const CoefficientField& K, const ImpesConfig& config,
                            bool keep_pressures) {
  const double sigma = resolve_sigma(config, K);
  auto pressure = [&](const std::vector<double>& coef, DgFunction* keep) {
    DgFunction u = solve_dg_reference(mesh.fine(), coef, sigma, config.bc, {}, config.rtol);
    FluxField flux = extract_flux(mesh.fine(), coef, sigma, config.bc, u, {}, mesh.fine());
    if (keep) *keep = std::move(u);
    return flux;
  };
  return run_loop(mesh.fine(), mesh, K, config, pressure, keep_pressures);
}

}  // namespace lodpg
