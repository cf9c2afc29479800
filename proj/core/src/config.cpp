#include "lodpg/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lodpg/error.hpp"

namespace lodpg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<Layers> to_layers(const std::string& key, const std::string& v) {
  std::vector<Layers> out;
  for (const auto& item : split_list(v)) {
    try {
      out.push_back(Layers::parse(item));
    } catch (const std::exception& e) {
      throw ConfigError("'" + key + "': bad layer count '" + item + "' (" + e.what() + ")");
    }
  }
  return out;
}

}  // namespace

const char* to_string(ProblemKind p) noexcept {
  switch (p) {
    case ProblemKind::EllipticCg: return "elliptic-cg";
    case ProblemKind::EllipticDg: return "elliptic-dg";
    case ProblemKind::Impes: return "impes";
  }
  return "?";
}

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::GLod: return "g-lod";
    case Method::PgLod: return "pg-lod";
    case Method::Reference: return "reference";
  }
  return "?";
}

CoefficientField CoefficientSpec::build(const TwoLevelMesh& mesh) const {
  switch (kind) {
    case Kind::Analytic: return analytic_a_eps(mesh, eps, amplitude);
    case Kind::Constant: return constant_field(mesh, value);
    case Kind::Raster: return load_raster(raster, mesh, log10);
    case Kind::Synthetic: return raster_to_field(synthetic_log_raster(synthetic_n, contrast, seed), mesh, true);
  }
  throw ConfigError("unknown coefficient kind");
}

Layers auto_layers(double H, double log_base) {
  const double v = 2.0 * std::abs(std::log(H) / std::log(log_base));
  return Layers(static_cast<std::int64_t>(std::ceil(v - 1e-12)));
}

ExperimentConfig ExperimentConfig::parse(std::istream& in, const std::string& source) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
    if (eq == std::string::npos) throw ConfigError(where() + "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string v = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where() + "empty key");
    c.entries.emplace_back(key, v);
    try {
      if (key == "problem") {
        if (v == "elliptic-cg") c.problem = ProblemKind::EllipticCg;
        else if (v == "elliptic-dg") c.problem = ProblemKind::EllipticDg;
        else if (v == "impes") c.problem = ProblemKind::Impes;
        else throw ConfigError("unknown problem '" + v + "'");
      } else if (key == "n_fine") {
        c.n_fine = to_int(key, v);
      } else if (key == "n_coarse") {
        c.n_coarse.clear();
        for (const auto& s : split_list(v)) c.n_coarse.push_back(to_int(key, s));
      } else if (key == "k") {
        c.k_auto = v == "auto";
        c.k = c.k_auto ? std::vector<Layers>{} : to_layers(key, v);
      } else if (key.rfind("k.", 0) == 0) {
        c.k_override[to_int(key, key.substr(2))] = to_layers(key, v);
      } else if (key == "k_log_base") {
        if (v == "e") c.k_log_base = std::exp(1.0);
        else c.k_log_base = to_double(key, v);
      } else if (key == "methods") {
        c.methods.clear();
        for (const auto& s : split_list(v)) {
          if (s == "g-lod") c.methods.push_back(Method::GLod);
          else if (s == "pg-lod") c.methods.push_back(Method::PgLod);
          else if (s == "reference") c.methods.push_back(Method::Reference);
          else throw ConfigError("unknown method '" + s + "'");
        }
      } else if (key == "coefficient") {
        using K = CoefficientSpec::Kind;
        if (v == "analytic") c.coefficient.kind = K::Analytic;
        else if (v == "constant") c.coefficient.kind = K::Constant;
        else if (v == "raster") c.coefficient.kind = K::Raster;
        else if (v == "synthetic") c.coefficient.kind = K::Synthetic;
        else throw ConfigError("unknown coefficient '" + v + "'");
      } else if (key == "eps") {
        c.coefficient.eps = to_double(key, v);
      } else if (key == "amplitude") {
        c.coefficient.amplitude = to_double(key, v);
      } else if (key == "value") {
        c.coefficient.value = to_double(key, v);
      } else if (key == "raster") {
        c.coefficient.raster = v;
      } else if (key == "raster_log10") {
        c.coefficient.log10 = to_bool(key, v);
      } else if (key == "synthetic_n") {
        c.coefficient.synthetic_n = to_int(key, v);
      } else if (key == "contrast") {
        c.coefficient.contrast = to_double(key, v);
      } else if (key == "seed") {
        c.coefficient.seed = static_cast<std::uint64_t>(to_int(key, v));
      } else if (key == "rhs") {
        if (v != "x-0.5") to_double(key, v);
        c.rhs = v;
      } else if (key == "bc") {
        if (v == "dirichlet") c.bc.kind.fill(BoundaryKind::Dirichlet);
        else if (v == "left-right") c.bc = DgBoundary::left_right(c.bc.value[0], c.bc.value[1]);
        else throw ConfigError("unknown bc '" + v + "'");
      } else if (key == "bc_left") {
        c.bc.value[static_cast<int>(Side::Left)] = to_double(key, v);
      } else if (key == "bc_right") {
        c.bc.value[static_cast<int>(Side::Right)] = to_double(key, v);
      } else if (key == "sigma") {
        c.sigma = to_double(key, v);
      } else if (key == "rtol") {
        c.rtol = to_double(key, v);
      } else if (key == "threads") {
        c.threads = to_int(key, v);
      } else if (key == "output") {
        c.output = v;
      } else if (key == "t_end") {
        c.t_end = to_double(key, v);
      } else if (key == "n_pressure") {
        c.n_pressure = to_int(key, v);
      } else if (key == "m_transport") {
        c.m_transport = to_int(key, v);
      } else if (key == "mu_w") {
        c.model.mu_w = to_double(key, v);
      } else if (key == "mu_n") {
        c.model.mu_n = to_double(key, v);
      } else if (key == "porosity") {
        c.porosity = to_double(key, v);
      } else if (key == "cfl") {
        c.cfl = to_double(key, v);
      } else if (key == "auto_substep") {
        c.auto_substep = to_bool(key, v);
      } else if (key == "reference_dir") {
        c.reference_dir = v;
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse(in, path.string());
}

void ExperimentConfig::validate() const {
  if (n_coarse.empty()) throw ConfigError("n_coarse is empty");
  if (methods.empty()) throw ConfigError("method list is empty");
  for (int nc : n_coarse) {
    if (nc <= 0 || n_fine % nc != 0) {
      throw ConfigError("n_coarse " + std::to_string(nc) + " does not divide n_fine " + std::to_string(n_fine));
    }
    try {
      (void)build_mesh(nc, n_fine / nc);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (schedule(nc).empty()) throw ConfigError("empty k schedule for n_coarse " + std::to_string(nc));
  }
  if (!(k_log_base > 1.0)) throw ConfigError("k_log_base must exceed 1");
  if (!(rtol > 0.0)) throw ConfigError("rtol must be positive");
  if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (problem != ProblemKind::EllipticCg && !bc.has_dirichlet()) {
    throw ConfigError("bc needs at least one Dirichlet side");
  }
  if (problem == ProblemKind::Impes) {
    if (n_pressure < 1 || m_transport < 1) throw ConfigError("n_pressure and m_transport must be at least 1");
    if (!(t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
    if (!(porosity > 0.0) || !(cfl > 0.0) || cfl > 1.0) throw ConfigError("need porosity > 0 and 0 < cfl <= 1");
    if (!(model.mu_w > 0.0) || !(model.mu_n > 0.0)) throw ConfigError("viscosities must be positive");
  }
  if (coefficient.kind == CoefficientSpec::Kind::Raster && coefficient.raster.empty()) {
    throw ConfigError("coefficient = raster needs a raster path");
  }
}

std::vector<Layers> ExperimentConfig::schedule(int nc) const {
  if (auto it = k_override.find(nc); it != k_override.end()) return it->second;
  if (k_auto) return {auto_layers(1.0 / nc, k_log_base)};
  return k;
}

bool ExperimentConfig::has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

SourceFn ExperimentConfig::source() const {
  if (rhs == "x-0.5") return [](double x, double) { return x - 0.5; };
  const double v = std::stod(rhs);
  return [v](double, double) { return v; };
}

ImpesConfig ExperimentConfig::impes(Layers layers) const {
  ImpesConfig ic;
  ic.transport.model = model;
  ic.transport.porosity = porosity;
  ic.transport.cfl = cfl;
  ic.bc = bc;
  ic.t_end = t_end;
  ic.n_pressure = n_pressure;
  ic.m_transport = m_transport;
  ic.auto_substep = auto_substep;
  ic.k = layers;
  ic.sigma = sigma;
  ic.rtol = rtol;
  ic.correctors.threads = threads;
  ic.correctors.rtol = rtol;
  return ic;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [k, v] : entries) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

}  // namespace lodpg
