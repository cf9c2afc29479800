#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lodpg {

/// Largest supported number of fine cells per dimension. Keeps every global
/// index (fine DG dofs included) well inside a 32-bit int.
inline constexpr int kMaxFineCellsPerDim = 1024;

/// Nonnegative rational number of patch layers, e.g. 0, 1/2, 3.
class Layers {
public:
  constexpr Layers() = default;
  Layers(std::int64_t num, std::int64_t den = 1);

  /// Parses "3", "1/2" or "0.25" (decimals must be exact dyadic/decimal
  /// fractions with at most 6 digits).
  static Layers parse(std::string_view text);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  bool is_integer() const noexcept { return den_ == 1; }
  double value() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Number of fine element layers floor(k * H / h) = floor(k * ratio).
  int fine_layers(int ratio) const noexcept;

  std::string str() const;

  friend bool operator==(const Layers&, const Layers&) = default;
  friend bool operator<(const Layers& a, const Layers& b) noexcept {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }

private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Half-open box of fine cells [i0, i1) x [j0, j1).
struct CellBox {
  int i0 = 0, i1 = 0, j0 = 0, j1 = 0;

  int width() const noexcept { return i1 - i0; }
  int height() const noexcept { return j1 - j0; }
  int count() const noexcept { return width() * height(); }
  bool contains(int i, int j) const noexcept { return i >= i0 && i < i1 && j >= j0 && j < j1; }
  bool contains(const CellBox& o) const noexcept {
    return o.i0 >= i0 && o.i1 <= i1 && o.j0 >= j0 && o.j1 <= j1;
  }
  friend bool operator==(const CellBox&, const CellBox&) = default;
};

enum class Side : std::uint8_t { Left = 0, Right = 1, Bottom = 2, Top = 3 };

/// An edge of a uniform grid. `minus` is the cell on the low-coordinate side,
/// `plus` the cell on the high side (-1 outside the domain). The normal points
/// from minus to plus along `axis` (0 = x, 1 = y).
struct GridEdge {
  int minus = -1;
  int plus = -1;
  int axis = 0;
  double length = 0.0;
  bool boundary() const noexcept { return minus < 0 || plus < 0; }
  /// Boundary side for boundary edges.
  Side side() const noexcept;
};

/// Uniform n x n grid of square cells on the unit square. Cell (i, j) has id
/// j * n + i; node (i, j) has id j * (n + 1) + i.
class UniformGrid {
public:
  explicit UniformGrid(int n = 1);

  int n() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  int num_cells() const noexcept { return n_ * n_; }
  int num_nodes() const noexcept { return (n_ + 1) * (n_ + 1); }

  int cell(int i, int j) const noexcept { return j * n_ + i; }
  int node(int i, int j) const noexcept { return j * (n_ + 1) + i; }
  std::array<int, 2> cell_ij(int c) const noexcept { return {c % n_, c / n_}; }
  std::array<int, 2> node_ij(int v) const noexcept { return {v % (n_ + 1), v / (n_ + 1)}; }

  /// Corner nodes of a cell in the order (0,0), (1,0), (0,1), (1,1).
  std::array<int, 4> cell_nodes(int c) const noexcept;
  std::array<double, 2> node_coord(int v) const noexcept;
  std::array<double, 2> cell_center(int c) const noexcept;
  bool on_boundary(int v) const noexcept;

  /// All edges: first the (n+1) * n vertical edges (normal along x, id
  /// j * (n+1) + i for the edge at x = i h), then the n * (n+1) horizontal
  /// edges (normal along y, id offset + j * n + i for the edge at y = j h).
  const std::vector<GridEdge>& edges() const noexcept { return edges_; }
  int vertical_edge(int i, int j) const noexcept { return j * (n_ + 1) + i; }
  int horizontal_edge(int i, int j) const noexcept { return (n_ + 1) * n_ + j * n_ + i; }

private:
  int n_;
  double h_;
  std::vector<GridEdge> edges_;
};

/// Nested uniform coarse/fine quadrilateral meshes of the unit square. The
/// fine mesh splits each coarse cell into ratio x ratio cells.
class TwoLevelMesh {
public:
  TwoLevelMesh(int n_coarse, int ratio);

  int n_coarse() const noexcept { return coarse_.n(); }
  int ratio() const noexcept { return ratio_; }
  int n_fine() const noexcept { return fine_.n(); }
  double H() const noexcept { return coarse_.h(); }
  double h() const noexcept { return fine_.h(); }

  const UniformGrid& coarse() const noexcept { return coarse_; }
  const UniformGrid& fine() const noexcept { return fine_; }

  int num_coarse_cells() const noexcept { return coarse_.num_cells(); }
  int num_fine_cells() const noexcept { return fine_.num_cells(); }

  /// Coarse cell containing a fine cell.
  int coarse_of_fine(int fine_cell) const noexcept { return coarse_of_fine_[fine_cell]; }
  /// Fine cells of a coarse cell, row-major inside the coarse cell.
  std::vector<int> fine_cells_of(int coarse_cell) const;
  CellBox fine_box_of(int coarse_cell) const noexcept;

  /// Fine node that coincides with a coarse node.
  int fine_node_of_coarse_node(int coarse_node) const noexcept;

  /// Interior coarse nodes and their compact numbering (-1 for boundary nodes).
  const std::vector<int>& interior_coarse_nodes() const noexcept { return interior_coarse_; }
  int interior_coarse_index(int coarse_node) const noexcept { return interior_coarse_index_[coarse_node]; }
  int num_interior_coarse_nodes() const noexcept { return static_cast<int>(interior_coarse_.size()); }

  /// Interior fine nodes and their compact numbering (-1 for boundary nodes).
  const std::vector<int>& interior_fine_nodes() const noexcept { return interior_fine_; }
  int interior_fine_index(int fine_node) const noexcept { return interior_fine_index_[fine_node]; }
  int num_interior_fine_nodes() const noexcept { return static_cast<int>(interior_fine_.size()); }

private:
  UniformGrid coarse_;
  UniformGrid fine_;
  int ratio_;
  std::vector<int> coarse_of_fine_;
  std::vector<int> interior_coarse_;
  std::vector<int> interior_coarse_index_;
  std::vector<int> interior_fine_;
  std::vector<int> interior_fine_index_;
};

/// Validating factory. Throws std::invalid_argument on n_coarse < 2,
/// ratio < 4 or n_coarse * ratio above kMaxFineCellsPerDim.
TwoLevelMesh build_mesh(int n_coarse, int ratio);

/// Patch U_k(T): a coarse cell grown by k layers, always a box of fine cells
/// clipped to the domain.
struct Patch {
  int center = 0;
  Layers layers;
  CellBox box;

  std::vector<int> fine_cells(const UniformGrid& fine) const;
  /// Fine nodes strictly inside the box that are not on the domain boundary.
  std::vector<int> interior_fine_nodes(const UniformGrid& fine) const;
};

/// Integer k grows by coarse vertex-adjacency layers; non-integer k grows
/// floor(k * ratio) fine layers around the closure of T.
Patch make_patch(const TwoLevelMesh& mesh, int coarse_cell, Layers k);

/// Fine-layer growth U_{f,l}(T) for an explicit number of fine layers.
CellBox grow_fine_layers(const TwoLevelMesh& mesh, int coarse_cell, int fine_layers);

/// Coarse-layer growth U_k(T) by closure intersection, for integer k.
CellBox grow_coarse_layers(const TwoLevelMesh& mesh, int coarse_cell, int k);

}  // namespace lodpg
