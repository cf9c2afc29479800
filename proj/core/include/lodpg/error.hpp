#pragma once

#include <stdexcept>
#include <string>

namespace lodpg {

/// Invalid experiment configuration or malformed input file.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A linear solve failed (factorization breakdown, singular matrix, ...).
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The Petrov-Galerkin coarse system is singular or has a spectrum with a
/// non-positive real part.
class InfSupError : public SolverError {
public:
  using SolverError::SolverError;
};

/// An explicit transport step was requested with a time step above the
/// stability limit. `required_dt()` is the largest admissible step.
class CflError : public std::runtime_error {
public:
  CflError(const std::string& what, double required_dt)
      : std::runtime_error(what), required_dt_(required_dt) {}
  double required_dt() const noexcept { return required_dt_; }

private:
  double required_dt_;
};

}  // namespace lodpg
