#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lodpg/mesh.hpp"

namespace lodpg {

/// Scalar diffusion coefficient, constant on each fine cell.
class CoefficientField {
public:
  CoefficientField() = default;
  /// Throws std::invalid_argument if any value is non-finite or <= 0.
  explicit CoefficientField(std::vector<double> values);

  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](int cell) const noexcept { return values_[static_cast<std::size_t>(cell)]; }
  std::size_t size() const noexcept { return values_.size(); }

  double alpha0() const noexcept { return alpha0_; }
  double beta0() const noexcept { return beta0_; }
  double contrast() const noexcept { return beta0_ / alpha0_; }

  /// Cellwise product with per-cell factors.
  CoefficientField scaled(const std::vector<double>& factors) const;

private:
  std::vector<double> values_;
  double alpha0_ = 1.0;
  double beta0_ = 1.0;
};

/// The oscillating test coefficient A_eps = h(c_eps(x)) with
///   c_eps = 1 + amplitude * sum_{j=0}^{4} sum_{i=0}^{j} 2/(j+1)
///               cos(floor(i x2 - x1/(1+i)) + floor(i x1/eps) + floor(x2/eps)),
///   h(t) = t^4 on (1/2, 1), t^(3/2) on (1, 3/2), t otherwise.
/// The default amplitude is 1/10.
double a_eps_point(double x1, double x2, double eps, double amplitude = 0.1);

/// Samples a_eps_point at fine-cell midpoints.
CoefficientField analytic_a_eps(const TwoLevelMesh& mesh, double eps, double amplitude = 0.1);

CoefficientField constant_field(const TwoLevelMesh& mesh, double value);

/// Raster of nx * ny values, row-major, row 0 at y = 0.
struct Raster {
  int nx = 0;
  int ny = 0;
  std::vector<double> values;
};

/// Plain text: first line `nx ny`, then nx * ny decimal values.
Raster read_raster(const std::filesystem::path& path);
void write_raster(const std::filesystem::path& path, const Raster& raster);

/// Maps a raster onto the fine mesh: a coarser raster is replicated
/// blockwise, a finer raster is averaged cellwise. With log_scale each
/// value v becomes 10^v (applied before averaging). Throws ConfigError on
/// incompatible dimensions or on non-finite / non-positive results.
CoefficientField raster_to_field(const Raster& raster, const TwoLevelMesh& mesh, bool log_scale);
CoefficientField load_raster(const std::filesystem::path& path, const TwoLevelMesh& mesh, bool log_scale);

/// Smooth log-normal-like random field on an n x n raster whose log10 values
/// span exactly [-log10(contrast)/2, +log10(contrast)/2]. Deterministic for a
/// given seed. Values are log10-scaled (feed to raster_to_field with
/// log_scale = true).
Raster synthetic_log_raster(int n, double contrast, std::uint64_t seed, int smoothing_passes = 3);

}  // namespace lodpg
