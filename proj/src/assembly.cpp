#include "fluxpot/assembly.hpp"

#include <array>
#include <cmath>

#include "fluxpot/error.hpp"

namespace fluxpot {

DiffusionTensor DiffusionTensor::rotated(double a, double b, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {a * c * c + b * s * s, (a - b) * c * s, a * s * s + b * c * c};
}

namespace {

using Local = std::array<std::array<double, 4>, 4>;

constexpr std::array<double, 3> kGaussPoints = {0.5 - 0.3872983346207417, 0.5,
                                                0.5 + 0.3872983346207417};
constexpr std::array<double, 3> kGaussWeights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

struct BasisAt {
  std::array<double, 4> phi;
  std::array<Point, 4> grad;
};

// Bilinear basis on a square of side h, corners counterclockwise from lower left.
BasisAt basis(double xi, double eta, double h) {
  BasisAt b;
  b.phi = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  b.grad = {Point{-(1 - eta) / h, -(1 - xi) / h}, Point{(1 - eta) / h, -xi / h},
            Point{eta / h, xi / h}, Point{-eta / h, (1 - xi) / h}};
  return b;
}

Local local_matrix(const Mesh& mesh, std::size_t cell, const OperatorKind& kind) {
  const double h = mesh.h();
  const Point origin = mesh.nodes()[mesh.cells()[cell][0]];
  Local a{};
  for (std::size_t qx = 0; qx < 3; ++qx)
    for (std::size_t qy = 0; qy < 3; ++qy) {
      const double xi = kGaussPoints[qx], eta = kGaussPoints[qy];
      const double w = kGaussWeights[qx] * kGaussWeights[qy] * h * h;
      const Point x{origin.x + h * xi, origin.y + h * eta};
      const BasisAt bf = basis(xi, eta, h);
      std::visit(
          [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, op::ConsistentMass>) {
              for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) a[i][j] += w * bf.phi[i] * bf.phi[j];
            } else if constexpr (std::is_same_v<K, op::Advection>) {
              const Point v = k.velocity.value(x);
              const double div = k.velocity.divergence(x);
              for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                  a[i][j] -= w * bf.phi[i] *
                             (v.x * bf.grad[j].x + v.y * bf.grad[j].y + div * bf.phi[j]);
            } else if constexpr (std::is_same_v<K, op::StreamlineDiffusion>) {
              const Point v = k.velocity.value(x);
              std::array<double, 4> vg{};
              for (int i = 0; i < 4; ++i) vg[i] = v.x * bf.grad[i].x + v.y * bf.grad[i].y;
              for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) a[i][j] -= w * vg[i] * vg[j];
            } else {
              const DiffusionTensor& d = k.tensor;
              for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                  const Point& gi = bf.grad[i];
                  const Point& gj = bf.grad[j];
                  a[i][j] -= w * (gi.x * (d.xx * gj.x + d.xy * gj.y) +
                                  gi.y * (d.xy * gj.x + d.yy * gj.y));
                }
            }
          },
          kind);
    }
  return a;
}

void scatter(const Mesh& mesh, std::size_t cell, const Local& a, std::span<double> values) {
  const auto& p = *mesh.pattern();
  const auto& c = mesh.cells()[cell];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) values[p.find(c[i], c[j])] += a[i][j];
}

}  // namespace

SparseMatrix assemble(const Mesh& mesh, const OperatorKind& kind) {
  SparseMatrix m(mesh.pattern());
  auto values = m.values();
  // Cells of one colour share no node, so their scatters never collide.
  for (std::size_t colour = 0; colour < 4; ++colour) {
    const auto n_cells = static_cast<std::ptrdiff_t>(mesh.num_cells());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
      const auto g = mesh.cell_grid(static_cast<std::size_t>(c));
      if ((g[0] % 2) + 2 * (g[1] % 2) != colour) continue;
      scatter(mesh, static_cast<std::size_t>(c), local_matrix(mesh, static_cast<std::size_t>(c), kind),
              values);
    }
  }
  return m;
}

namespace serial {

SparseMatrix assemble(const Mesh& mesh, const OperatorKind& kind) {
  SparseMatrix m(mesh.pattern());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c) scatter(mesh, c, local_matrix(mesh, c, kind), m.values());
  return m;
}

}  // namespace serial

Vector lumped_masses(const SparseMatrix& consistent_mass) {
  Vector m = consistent_mass.row_sums();
  for (double v : m)
    if (!(v > 0.0)) throw Error("lump: nonpositive row sum in consistent mass matrix");
  return m;
}

SparseMatrix lump(const SparseMatrix& consistent_mass) {
  return SparseMatrix::diagonal(lumped_masses(consistent_mass));
}

BoundaryOperator::BoundaryOperator(const Mesh& mesh, const VelocityField& velocity,
                                   const ScalarFn& inflow_value)
    : mass_(mesh.pattern()), data_(mesh.num_nodes(), 0.0), weights_(mesh.num_nodes(), 0.0) {
  const auto& p = *mesh.pattern();
  for (const auto& f : mesh.boundary_faces()) {
    if (f.tag != BoundaryTag::Inflow) continue;
    const Point a = mesh.nodes()[f.a];
    const Point b = mesh.nodes()[f.b];
    const Point nrm = outward_normal(mesh, f);
    const double len = face_length(mesh, f);
    std::array<std::array<double, 2>, 2> local{};
    std::array<double, 2> rhs{};
    for (std::size_t q = 0; q < 3; ++q) {
      const double t = kGaussPoints[q];
      const Point x{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      const Point v = velocity.value(x);
      const double w = kGaussWeights[q] * len * std::abs(v.x * nrm.x + v.y * nrm.y);
      const std::array<double, 2> phi{1.0 - t, t};
      const double ud = inflow_value(x);
      for (int i = 0; i < 2; ++i) {
        rhs[i] += w * phi[i] * ud;
        for (int j = 0; j < 2; ++j) local[i][j] += w * phi[i] * phi[j];
      }
    }
    const std::array<std::size_t, 2> idx{f.a, f.b};
    for (int i = 0; i < 2; ++i) {
      data_[idx[i]] += rhs[i];
      for (int j = 0; j < 2; ++j) mass_.values()[p.find(idx[i], idx[j])] += local[i][j];
    }
  }
  weights_ = mass_.row_sums();
}

Vector BoundaryOperator::b(std::span<const double> u) const {
  Vector out = spmv(mass_, u);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = data_[i] - out[i];
  return out;
}

BoundaryTerms BoundaryOperator::terms(std::span<const double> u) const {
  BoundaryTerms t;
  t.b = b(u);
  t.b_tilde.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) t.b_tilde[i] = data_[i] - weights_[i] * u[i];
  t.f_b = difference_flux(mass_, u);
  return t;
}

BoundaryTerms boundary_terms(const Mesh& mesh, std::span<const double> u, const ScalarFn& inflow_value,
                             const VelocityField& velocity) {
  return BoundaryOperator(mesh, velocity, inflow_value).terms(u);
}

Vector interpolate(const Mesh& mesh, const ScalarFn& f) {
  Vector u(mesh.num_nodes());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(mesh.nodes()[i]);
  return u;
}

}  // namespace fluxpot
