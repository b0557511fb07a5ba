#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "fluxpot/sparse.hpp"

namespace fluxpot {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag { Outer, Inner, Inflow, NonInflow };

/// Boundary edge oriented counterclockwise with respect to its cell, so the
/// outward normal is (dy, -dx) / length.
struct BoundaryFace {
  std::size_t a;
  std::size_t b;
  std::size_t cell;
  BoundaryTag tag;
};

/// Structured mesh of axis-aligned Q1 squares on a subset of the unit square.
/// Nodes are ordered lexicographically by (row, column).
class Mesh {
 public:
  using Cell = std::array<std::size_t, 4>;

  std::size_t n() const { return n_; }
  double h() const { return h_; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_cells() const { return cells_.size(); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }

  /// Grid coordinates (column, row) of the lower-left corner of cell c.
  std::array<std::size_t, 2> cell_grid(std::size_t c) const { return cell_grid_[c]; }
  /// Node at grid position (ix, iy), or npos when removed.
  std::size_t node_at(std::size_t ix, std::size_t iy) const;
  /// Cell with lower-left grid corner (ix, iy), or npos when removed.
  std::size_t cell_at(std::size_t ix, std::size_t iy) const;
  /// Cell containing point p (ties resolved towards the upper-right cell), or npos.
  std::size_t locate(Point p) const;

  /// Node stencils from shared-cell adjacency, diagonal included.
  const PatternPtr& pattern() const { return pattern_; }

  /// True for nodes on any boundary face.
  std::vector<bool> boundary_nodes() const;
  std::vector<bool> nodes_with_tag(BoundaryTag tag) const;

  double area() const { return static_cast<double>(cells_.size()) * h_ * h_; }

  Mesh with_faces(std::vector<BoundaryFace> faces) const;

 private:
  friend Mesh build_unit_square(std::size_t n);
  friend Mesh build_punched_square(std::size_t n);
  static Mesh build(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& keep_cell,
                    const std::function<BoundaryTag(Point, Point)>& tag_face);

  std::size_t n_ = 0;
  double h_ = 0.0;
  std::vector<Point> nodes_;
  std::vector<Cell> cells_;
  std::vector<std::array<std::size_t, 2>> cell_grid_;
  std::vector<BoundaryFace> faces_;
  std::vector<std::size_t> grid_to_node_;
  std::vector<std::size_t> grid_to_cell_;
  PatternPtr pattern_;
};

/// (0,1)^2 split into n x n squares. Requires n >= 2.
Mesh build_unit_square(std::size_t n);

/// (0,1)^2 without [4/9, 5/9]^2. Requires n divisible by 9 so that the hole
/// boundary lies on mesh lines.
Mesh build_punched_square(std::size_t n);

using VelocityFn = std::function<Point(Point)>;

/// Retags every boundary face: Inflow iff v.n < 0 at the face midpoint.
Mesh classify_inflow(const Mesh& mesh, const VelocityFn& velocity);

Point outward_normal(const Mesh& mesh, const BoundaryFace& face);
double face_length(const Mesh& mesh, const BoundaryFace& face);

}  // namespace fluxpot
