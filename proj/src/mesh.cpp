#include "fluxpot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "fluxpot/error.hpp"

namespace fluxpot {

Mesh Mesh::build(std::size_t n, const std::function<bool(std::size_t, std::size_t)>& keep_cell,
                 const std::function<BoundaryTag(Point, Point)>& tag_face) {
  Mesh m;
  m.n_ = n;
  m.h_ = 1.0 / static_cast<double>(n);
  const std::size_t np = n + 1;

  std::vector<bool> used(np * np, false);
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t ix = 0; ix < n; ++ix)
      if (keep_cell(ix, iy))
        for (auto [dx, dy] : {std::pair{0, 0}, {1, 0}, {1, 1}, {0, 1}})
          used[(iy + dy) * np + ix + dx] = true;

  m.grid_to_node_.assign(np * np, npos);
  for (std::size_t iy = 0; iy < np; ++iy)
    for (std::size_t ix = 0; ix < np; ++ix)
      if (used[iy * np + ix]) {
        m.grid_to_node_[iy * np + ix] = m.nodes_.size();
        m.nodes_.push_back({static_cast<double>(ix) * m.h_, static_cast<double>(iy) * m.h_});
      }

  m.grid_to_cell_.assign(n * n, npos);
  for (std::size_t iy = 0; iy < n; ++iy)
    for (std::size_t ix = 0; ix < n; ++ix) {
      if (!keep_cell(ix, iy)) continue;
      m.grid_to_cell_[iy * n + ix] = m.cells_.size();
      m.cells_.push_back({m.grid_to_node_[iy * np + ix], m.grid_to_node_[iy * np + ix + 1],
                          m.grid_to_node_[(iy + 1) * np + ix + 1],
                          m.grid_to_node_[(iy + 1) * np + ix]});
      m.cell_grid_.push_back({ix, iy});
    }

  // A face is on the boundary iff exactly one cell uses it.
  std::map<std::pair<std::size_t, std::size_t>, int> face_count;
  for (const auto& c : m.cells_)
    for (int e = 0; e < 4; ++e) {
      const std::size_t a = c[e], b = c[(e + 1) % 4];
      ++face_count[{std::min(a, b), std::max(a, b)}];
    }
  for (std::size_t ci = 0; ci < m.cells_.size(); ++ci) {
    const auto& c = m.cells_[ci];
    for (int e = 0; e < 4; ++e) {
      const std::size_t a = c[e], b = c[(e + 1) % 4];
      if (face_count[{std::min(a, b), std::max(a, b)}] == 1)
        m.faces_.push_back({a, b, ci, tag_face(m.nodes_[a], m.nodes_[b])});
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m.cells_.size() * 16);
  for (const auto& c : m.cells_)
    for (std::size_t a : c)
      for (std::size_t b : c) pairs.emplace_back(a, b);
  m.pattern_ = SparsityPattern::from_pairs(m.nodes_.size(), m.nodes_.size(), std::move(pairs));
  return m;
}

std::size_t Mesh::node_at(std::size_t ix, std::size_t iy) const {
  if (ix > n_ || iy > n_) return npos;
  return grid_to_node_[iy * (n_ + 1) + ix];
}

std::size_t Mesh::cell_at(std::size_t ix, std::size_t iy) const {
  if (ix >= n_ || iy >= n_) return npos;
  return grid_to_cell_[iy * n_ + ix];
}

std::size_t Mesh::locate(Point p) const {
  if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) return npos;
  auto index = [&](double v) {
    const auto i = static_cast<std::size_t>(std::floor(v / h_));
    return std::min(i, n_ - 1);
  };
  return cell_at(index(p.x), index(p.y));
}

std::vector<bool> Mesh::boundary_nodes() const {
  std::vector<bool> on(nodes_.size(), false);
  for (const auto& f : faces_) on[f.a] = on[f.b] = true;
  return on;
}

std::vector<bool> Mesh::nodes_with_tag(BoundaryTag tag) const {
  std::vector<bool> on(nodes_.size(), false);
  for (const auto& f : faces_)
    if (f.tag == tag) on[f.a] = on[f.b] = true;
  return on;
}

Mesh Mesh::with_faces(std::vector<BoundaryFace> faces) const {
  Mesh m = *this;
  m.faces_ = std::move(faces);
  return m;
}

Mesh build_unit_square(std::size_t n) {
  if (n < 2) throw ContractViolation("build_unit_square: n must be >= 2");
  return Mesh::build(
      n, [](std::size_t, std::size_t) { return true; },
      [](Point, Point) { return BoundaryTag::Outer; });
}

Mesh build_punched_square(std::size_t n) {
  if (n < 9 || n % 9 != 0)
    throw ContractViolation("build_punched_square: n must be a positive multiple of 9");
  const std::size_t lo = 4 * n / 9;
  const std::size_t hi = 5 * n / 9;
  auto in_hole = [lo, hi](std::size_t ix, std::size_t iy) {
    return ix >= lo && ix < hi && iy >= lo && iy < hi;
  };
  const double eps = 0.25 / static_cast<double>(n);
  auto on_outer = [eps](Point p) {
    return p.x < eps || p.x > 1.0 - eps || p.y < eps || p.y > 1.0 - eps;
  };
  return Mesh::build(
      n, [&](std::size_t ix, std::size_t iy) { return !in_hole(ix, iy); },
      [&](Point a, Point b) {
        return on_outer(a) && on_outer(b) ? BoundaryTag::Outer : BoundaryTag::Inner;
      });
}

Point outward_normal(const Mesh& mesh, const BoundaryFace& face) {
  const Point a = mesh.nodes()[face.a];
  const Point b = mesh.nodes()[face.b];
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  return {dy / len, -dx / len};
}

double face_length(const Mesh& mesh, const BoundaryFace& face) {
  const Point a = mesh.nodes()[face.a];
  const Point b = mesh.nodes()[face.b];
  return std::hypot(b.x - a.x, b.y - a.y);
}

Mesh classify_inflow(const Mesh& mesh, const VelocityFn& velocity) {
  std::vector<BoundaryFace> faces = mesh.boundary_faces();
  for (auto& f : faces) {
    const Point a = mesh.nodes()[f.a];
    const Point b = mesh.nodes()[f.b];
    const Point v = velocity({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    const Point nrm = outward_normal(mesh, f);
    f.tag = v.x * nrm.x + v.y * nrm.y < 0.0 ? BoundaryTag::Inflow : BoundaryTag::NonInflow;
  }
  return mesh.with_faces(std::move(faces));
}

}  // namespace fluxpot
