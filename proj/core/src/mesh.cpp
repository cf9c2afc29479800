#include "lodpg/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>

namespace lodpg {

Layers::Layers(std::int64_t num, std::int64_t den) {
  if (den <= 0 || num < 0) {
    throw std::invalid_argument("layers must be a nonnegative rational with positive denominator");
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = num / (g == 0 ? 1 : g);
  den_ = den / (g == 0 ? 1 : g);
}

namespace {

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw std::invalid_argument("cannot parse layer count '" + std::string(s) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Layers Layers::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw std::invalid_argument("empty layer count");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    return Layers(parse_int(trim(text.substr(0, slash))), parse_int(trim(text.substr(slash + 1))));
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    const auto whole = text.substr(0, dot);
    const auto frac = text.substr(dot + 1);
    if (frac.size() > 6) throw std::invalid_argument("too many decimals in layer count");
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t w = whole.empty() ? 0 : parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    return Layers(w * den + f, den);
  }
  return Layers(parse_int(text));
}

int Layers::fine_layers(int ratio) const noexcept {
  return static_cast<int>((num_ * ratio) / den_);
}

std::string Layers::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Side GridEdge::side() const noexcept {
  if (axis == 0) return minus < 0 ? Side::Left : Side::Right;
  return minus < 0 ? Side::Bottom : Side::Top;
}

UniformGrid::UniformGrid(int n) : n_(n), h_(1.0 / n) {
  if (n < 1) throw std::invalid_argument("grid needs at least one cell per dimension");
  edges_.resize(static_cast<std::size_t>(2 * (n + 1) * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= n; ++i) {
      GridEdge& e = edges_[vertical_edge(i, j)];
      e.axis = 0;
      e.length = h_;
      e.minus = i > 0 ? cell(i - 1, j) : -1;
      e.plus = i < n ? cell(i, j) : -1;
    }
  }
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i < n; ++i) {
      GridEdge& e = edges_[horizontal_edge(i, j)];
      e.axis = 1;
      e.length = h_;
      e.minus = j > 0 ? cell(i, j - 1) : -1;
      e.plus = j < n ? cell(i, j) : -1;
    }
  }
}

std::array<int, 4> UniformGrid::cell_nodes(int c) const noexcept {
  const auto [i, j] = cell_ij(c);
  return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
}

std::array<double, 2> UniformGrid::node_coord(int v) const noexcept {
  const auto [i, j] = node_ij(v);
  return {i * h_, j * h_};
}

std::array<double, 2> UniformGrid::cell_center(int c) const noexcept {
  const auto [i, j] = cell_ij(c);
  return {(i + 0.5) * h_, (j + 0.5) * h_};
}

bool UniformGrid::on_boundary(int v) const noexcept {
  const auto [i, j] = node_ij(v);
  return i == 0 || j == 0 || i == n_ || j == n_;
}

TwoLevelMesh::TwoLevelMesh(int n_coarse, int ratio)
    : coarse_(n_coarse), fine_(n_coarse * ratio), ratio_(ratio) {
  coarse_of_fine_.resize(fine_.num_cells());
  for (int c = 0; c < fine_.num_cells(); ++c) {
    const auto [i, j] = fine_.cell_ij(c);
    coarse_of_fine_[c] = coarse_.cell(i / ratio_, j / ratio_);
  }
  interior_coarse_index_.assign(coarse_.num_nodes(), -1);
  for (int v = 0; v < coarse_.num_nodes(); ++v) {
    if (!coarse_.on_boundary(v)) {
      interior_coarse_index_[v] = static_cast<int>(interior_coarse_.size());
      interior_coarse_.push_back(v);
    }
  }
  interior_fine_index_.assign(fine_.num_nodes(), -1);
  for (int v = 0; v < fine_.num_nodes(); ++v) {
    if (!fine_.on_boundary(v)) {
      interior_fine_index_[v] = static_cast<int>(interior_fine_.size());
      interior_fine_.push_back(v);
    }
  }
}

std::vector<int> TwoLevelMesh::fine_cells_of(int coarse_cell) const {
  const CellBox b = fine_box_of(coarse_cell);
  std::vector<int> cells;
  cells.reserve(static_cast<std::size_t>(b.count()));
  for (int j = b.j0; j < b.j1; ++j)
    for (int i = b.i0; i < b.i1; ++i) cells.push_back(fine_.cell(i, j));
  return cells;
}

CellBox TwoLevelMesh::fine_box_of(int coarse_cell) const noexcept {
  const auto [I, J] = coarse_.cell_ij(coarse_cell);
  return {I * ratio_, (I + 1) * ratio_, J * ratio_, (J + 1) * ratio_};
}

int TwoLevelMesh::fine_node_of_coarse_node(int coarse_node) const noexcept {
  const auto [I, J] = coarse_.node_ij(coarse_node);
  return fine_.node(I * ratio_, J * ratio_);
}

TwoLevelMesh build_mesh(int n_coarse, int ratio) {
  if (n_coarse < 2) throw std::invalid_argument("n_coarse must be at least 2");
  if (ratio < 4) {
    throw std::invalid_argument("ratio must be at least 4 (each coarse cell refined at least twice)");
  }
  if (static_cast<long long>(n_coarse) * ratio > kMaxFineCellsPerDim) {
    throw std::invalid_argument("n_coarse * ratio exceeds the supported maximum of " +
                                std::to_string(kMaxFineCellsPerDim) + " fine cells per dimension");
  }
  return TwoLevelMesh(n_coarse, ratio);
}

std::vector<int> Patch::fine_cells(const UniformGrid& fine) const {
  std::vector<int> cells;
  cells.reserve(static_cast<std::size_t>(box.count()));
  for (int j = box.j0; j < box.j1; ++j)
    for (int i = box.i0; i < box.i1; ++i) cells.push_back(fine.cell(i, j));
  return cells;
}

std::vector<int> Patch::interior_fine_nodes(const UniformGrid& fine) const {
  std::vector<int> nodes;
  const int n = fine.n();
  for (int j = std::max(box.j0 + 1, 1); j <= std::min(box.j1 - 1, n - 1); ++j)
    for (int i = std::max(box.i0 + 1, 1); i <= std::min(box.i1 - 1, n - 1); ++i)
      nodes.push_back(fine.node(i, j));
  return nodes;
}

CellBox grow_fine_layers(const TwoLevelMesh& mesh, int coarse_cell, int fine_layers) {
  CellBox b = mesh.fine_box_of(coarse_cell);
  const int n = mesh.n_fine();
  b.i0 = std::max(0, b.i0 - fine_layers);
  b.j0 = std::max(0, b.j0 - fine_layers);
  b.i1 = std::min(n, b.i1 + fine_layers);
  b.j1 = std::min(n, b.j1 + fine_layers);
  return b;
}

CellBox grow_coarse_layers(const TwoLevelMesh& mesh, int coarse_cell, int k) {
  // On a structured grid, closure-intersection growth adds the full ring of
  // vertex neighbours in every step.
  const auto [I, J] = mesh.coarse().cell_ij(coarse_cell);
  const int nc = mesh.n_coarse();
  const int r = mesh.ratio();
  const int I0 = std::max(0, I - k), I1 = std::min(nc, I + k + 1);
  const int J0 = std::max(0, J - k), J1 = std::min(nc, J + k + 1);
  return {I0 * r, I1 * r, J0 * r, J1 * r};
}

Patch make_patch(const TwoLevelMesh& mesh, int coarse_cell, Layers k) {
  if (coarse_cell < 0 || coarse_cell >= mesh.num_coarse_cells()) {
    throw std::out_of_range("coarse cell id out of range");
  }
  Patch p;
  p.center = coarse_cell;
  p.layers = k;
  if (k.is_integer()) {
    const auto layers = static_cast<int>(std::min<std::int64_t>(k.num(), mesh.n_coarse()));
    p.box = grow_coarse_layers(mesh, coarse_cell, layers);
  } else {
    p.box = grow_fine_layers(mesh, coarse_cell, std::min(k.fine_layers(mesh.ratio()), mesh.n_fine()));
  }
  return p;
}

}  // namespace lodpg
