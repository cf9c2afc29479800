#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lodpg/coefficients.hpp"
#include "lodpg/fem_cg.hpp"
#include "lodpg/fem_dg.hpp"
#include "lodpg/mesh.hpp"
#include "lodpg/transport.hpp"

namespace lodpg {

enum class ProblemKind { EllipticCg, EllipticDg, Impes };
enum class Method { GLod, PgLod, Reference };

const char* to_string(ProblemKind p) noexcept;
const char* to_string(Method m) noexcept;

struct CoefficientSpec {
  enum class Kind { Analytic, Constant, Raster, Synthetic };
  Kind kind = Kind::Analytic;
  double eps = 0.05;
  double amplitude = 0.1;
  double value = 1.0;
  std::filesystem::path raster;
  bool log10 = false;
  int synthetic_n = 64;
  double contrast = 1e3;
  std::uint64_t seed = 7;

  CoefficientField build(const TwoLevelMesh& mesh) const;
};

/// Experiment description read from a flat `key = value` file. Lists are
/// comma separated, `#` starts a comment. Recognized keys:
///
///   problem      elliptic-cg | elliptic-dg | impes
///   n_fine       fine cells per dimension
///   n_coarse     list of coarse cells per dimension
///   k            list of layer counts ("1/2", "3") or "auto"
///   k.<n>        layer list for n_coarse = <n> only
///   k_log_base   10 | e, used by k = auto: ceil(2 |log H|)
///   methods      list of g-lod, pg-lod, reference
///   coefficient  analytic | constant | raster | synthetic
///   eps, amplitude, value, raster, raster_log10, synthetic_n, contrast, seed
///   rhs          x-0.5 | <number>
///   bc           dirichlet (all sides) | left-right (no flow on top and
///                bottom); side values bc_left, bc_right, default 0
///   sigma        SIPG penalty (0 = 40 beta0)
///   rtol, threads, output
///   t_end, n_pressure, m_transport, mu_w, mu_n, porosity, cfl,
///   auto_substep, reference_dir      (impes)
struct ExperimentConfig {
  ProblemKind problem = ProblemKind::EllipticCg;
  int n_fine = 64;
  std::vector<int> n_coarse{4};
  std::vector<Layers> k{Layers(1)};
  std::map<int, std::vector<Layers>> k_override;
  bool k_auto = false;
  double k_log_base = 10.0;
  std::vector<Method> methods{Method::GLod, Method::PgLod};
  CoefficientSpec coefficient;
  std::string rhs = "x-0.5";
  DgBoundary bc = DgBoundary::homogeneous_dirichlet();
  double sigma = 0.0;
  double rtol = kDefaultRtol;
  int threads = 1;
  std::filesystem::path output = "out";
  bool store_correctors = false;

  double t_end = 0.25;
  int n_pressure = 10;
  int m_transport = 1;
  MobilityModel model;
  double porosity = 1.0;
  double cfl = 0.9;
  bool auto_substep = true;
  std::filesystem::path reference_dir;

  /// Key/value pairs in file order, the input of hash().
  std::vector<std::pair<std::string, std::string>> entries;

  /// Parses and validates; throws ConfigError with the offending line.
  static ExperimentConfig parse(std::istream& in, const std::string& source = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Layer schedule for one coarse resolution.
  std::vector<Layers> schedule(int n_coarse) const;
  bool has(Method m) const;
  SourceFn source() const;
  ImpesConfig impes(Layers k) const;
  /// FNV-1a hash of the normalized key/value pairs.
  std::uint64_t hash() const;
  /// Throws ConfigError when the description is inconsistent.
  void validate() const;
};

/// k = ceil(2 |log_base(H)|).
Layers auto_layers(double H, double log_base);

}  // namespace lodpg
