#include "lodpg/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "lodpg/error.hpp"

namespace lodpg {

CoefficientField::CoefficientField(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("empty coefficient field");
  alpha0_ = std::numeric_limits<double>::infinity();
  beta0_ = 0.0;
  for (double v : values_) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument("coefficient values must be finite and positive");
    }
    alpha0_ = std::min(alpha0_, v);
    beta0_ = std::max(beta0_, v);
  }
}

CoefficientField CoefficientField::scaled(const std::vector<double>& factors) const {
  if (factors.size() != values_.size()) throw std::invalid_argument("scale factor size mismatch");
  std::vector<double> v(values_.size());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = values_[c] * factors[c];
  return CoefficientField(std::move(v));
}

double a_eps_point(double x1, double x2, double eps, double amplitude) {
  double sum = 0.0;
  for (int j = 0; j <= 4; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double arg = std::floor(i * x2 - x1 / (1.0 + i)) + std::floor(i * x1 / eps) +
                         std::floor(x2 / eps);
      sum += 2.0 / (j + 1.0) * std::cos(arg);
    }
  }
  const double t = 1.0 + amplitude * sum;
  if (t > 0.5 && t < 1.0) return t * t * t * t;
  if (t > 1.0 && t < 1.5) return std::pow(t, 1.5);
  return t;
}

CoefficientField analytic_a_eps(const TwoLevelMesh& mesh, double eps, double amplitude) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const UniformGrid& g = mesh.fine();
  std::vector<double> v(static_cast<std::size_t>(g.num_cells()));
  for (int c = 0; c < g.num_cells(); ++c) {
    const auto [x, y] = g.cell_center(c);
    v[c] = a_eps_point(x, y, eps, amplitude);
  }
  return CoefficientField(std::move(v));
}

CoefficientField constant_field(const TwoLevelMesh& mesh, double value) {
  return CoefficientField(std::vector<double>(static_cast<std::size_t>(mesh.num_fine_cells()), value));
}

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open raster file '" + path.string() + "'");
  Raster r;
  if (!(in >> r.nx >> r.ny) || r.nx <= 0 || r.ny <= 0) {
    throw ConfigError("raster '" + path.string() + "': bad header, expected 'nx ny'");
  }
  const auto count = static_cast<std::size_t>(r.nx) * static_cast<std::size_t>(r.ny);
  r.values.reserve(count);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw ConfigError("raster '" + path.string() + "': cannot parse value '" + token + "'");
    }
    if (used != token.size()) {
      throw ConfigError("raster '" + path.string() + "': cannot parse value '" + token + "'");
    }
    r.values.push_back(v);
  }
  if (r.values.size() != count) {
    throw ConfigError("raster '" + path.string() + "': expected " + std::to_string(count) +
                      " values, found " + std::to_string(r.values.size()));
  }
  return r;
}

void write_raster(const std::filesystem::path& path, const Raster& raster) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write raster file '" + path.string() + "'");
  out << raster.nx << ' ' << raster.ny << '\n' << std::setprecision(17);
  for (int j = 0; j < raster.ny; ++j) {
    for (int i = 0; i < raster.nx; ++i) {
      out << raster.values[static_cast<std::size_t>(j) * raster.nx + i] << (i + 1 < raster.nx ? ' ' : '\n');
    }
  }
}

CoefficientField raster_to_field(const Raster& raster, const TwoLevelMesh& mesh, bool log_scale) {
  const int n = mesh.n_fine();
  if (raster.values.size() != static_cast<std::size_t>(raster.nx) * raster.ny) {
    throw ConfigError("raster value count does not match its dimensions");
  }
  auto value_at = [&](int i, int j) {
    const double raw = raster.values[static_cast<std::size_t>(j) * raster.nx + i];
    const double v = log_scale ? std::pow(10.0, raw) : raw;
    if (!std::isfinite(v) || v <= 0.0) {
      throw ConfigError("raster contains a non-finite or non-positive coefficient value");
    }
    return v;
  };
  auto axis_ok = [n](int m) { return (m <= n && n % m == 0) || (m > n && m % n == 0); };
  if (!axis_ok(raster.nx) || !axis_ok(raster.ny)) {
    throw ConfigError("raster dimensions " + std::to_string(raster.nx) + "x" + std::to_string(raster.ny) +
                      " do not map onto a " + std::to_string(n) + "x" + std::to_string(n) + " fine mesh");
  }
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // index range of raster cells covering fine cell (i, j) per axis
      auto range = [n](int m, int idx) -> std::pair<int, int> {
        if (m <= n) {
          const int b = idx / (n / m);
          return {b, b + 1};
        }
        const int f = m / n;
        return {idx * f, (idx + 1) * f};
      };
      const auto [ri0, ri1] = range(raster.nx, i);
      const auto [rj0, rj1] = range(raster.ny, j);
      double acc = 0.0;
      for (int rj = rj0; rj < rj1; ++rj)
        for (int ri = ri0; ri < ri1; ++ri) acc += value_at(ri, rj);
      out[static_cast<std::size_t>(j) * n + i] = acc / ((ri1 - ri0) * (rj1 - rj0));
    }
  }
  return CoefficientField(std::move(out));
}

CoefficientField load_raster(const std::filesystem::path& path, const TwoLevelMesh& mesh, bool log_scale) {
  return raster_to_field(read_raster(path), mesh, log_scale);
}

Raster synthetic_log_raster(int n, double contrast, std::uint64_t seed, int smoothing_passes) {
  if (n < 1 || !(contrast >= 1.0)) throw std::invalid_argument("bad synthetic raster parameters");
  std::mt19937_64 rng(seed);
  const double scale = 1.0 / 18446744073709551616.0;  // 2^-64
  std::vector<double> field(static_cast<std::size_t>(n) * n);
  for (auto& v : field) {
    // Box-Muller from two raw draws
    const double u1 = (static_cast<double>(rng()) + 1.0) * scale;
    const double u2 = static_cast<double>(rng()) * scale;
    v = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
  std::vector<double> tmp(field.size());
  for (int pass = 0; pass < smoothing_passes; ++pass) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
            acc += field[static_cast<std::size_t>(jj) * n + ii];
            ++cnt;
          }
        }
        tmp[static_cast<std::size_t>(j) * n + i] = acc / cnt;
      }
    }
    field.swap(tmp);
  }
  const auto [mn, mx] = std::minmax_element(field.begin(), field.end());
  const double lo = *mn, hi = *mx;
  const double half = 0.5 * std::log10(contrast);
  Raster r{n, n, {}};
  r.values.resize(field.size());
  for (std::size_t c = 0; c < field.size(); ++c) {
    r.values[c] = hi > lo ? -half + 2.0 * half * (field[c] - lo) / (hi - lo) : 0.0;
  }
  return r;
}

}  // namespace lodpg
