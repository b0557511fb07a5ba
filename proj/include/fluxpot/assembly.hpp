#pragma once

#include <functional>
#include <variant>

#include "fluxpot/flux.hpp"
#include "fluxpot/mesh.hpp"
#include "fluxpot/sparse.hpp"

namespace fluxpot {

struct VelocityField {
  VelocityFn value;
  std::function<double(Point)> divergence = [](Point) { return 0.0; };
};

/// Symmetric 2x2 tensor.
struct DiffusionTensor {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  /// R(-theta) diag(a, b) R(theta) with R(theta) = [[cos, sin], [-sin, cos]].
  static DiffusionTensor rotated(double a, double b, double theta);
};

namespace op {
struct ConsistentMass {};
struct Advection {
  VelocityField velocity;
};
struct StreamlineDiffusion {
  VelocityField velocity;
};
struct AnisotropicStiffness {
  DiffusionTensor tensor;
};
}  // namespace op

using OperatorKind =
    std::variant<op::ConsistentMass, op::Advection, op::StreamlineDiffusion, op::AnisotropicStiffness>;

/// Global matrix on the mesh pattern from 3x3 Gauss quadrature per cell.
///   ConsistentMass:        m_ij =  sum_e int phi_i phi_j
///   Advection:             k_ij = -sum_e int phi_i div(v phi_j)
///   StreamlineDiffusion:   s_ij = -sum_e int (v.grad phi_i)(v.grad phi_j)
///   AnisotropicStiffness:  k_ij = -sum_e int grad phi_i . (D grad phi_j)
/// Cells are processed in four independent colours under OpenMP.
SparseMatrix assemble(const Mesh& mesh, const OperatorKind& kind);

namespace serial {
/// Cell-by-cell reference of fluxpot::assemble.
SparseMatrix assemble(const Mesh& mesh, const OperatorKind& kind);
}  // namespace serial

/// Diagonal matrix of row sums; throws Error on a nonpositive row sum.
SparseMatrix lump(const SparseMatrix& consistent_mass);
/// Row sums m_i of the consistent mass matrix as a vector.
Vector lumped_masses(const SparseMatrix& consistent_mass);

using ScalarFn = std::function<double(Point)>;

/// Pieces of the weak inflow boundary term
///   b_i = sum_e int_{Gamma_D} phi_i (u_D - u_h) |v.n| ds = b~_i + sum_j f^b_ij.
struct BoundaryTerms {
  Vector b;
  Vector b_tilde;
  FluxSet f_b;
};

/// Time-independent part of the inflow boundary integrals: the boundary mass
/// B_ij = int phi_i phi_j |v.n| ds and the data vector int phi_i u_D |v.n| ds,
/// both over Inflow faces, 3-point Gauss per face.
class BoundaryOperator {
 public:
  BoundaryOperator(const Mesh& mesh, const VelocityField& velocity, const ScalarFn& inflow_value);

  BoundaryTerms terms(std::span<const double> u) const;
  /// b only.
  Vector b(std::span<const double> u) const;

  const SparseMatrix& boundary_mass() const { return mass_; }
  const Vector& data() const { return data_; }
  /// beta_i = sum_j B_ij.
  const Vector& weights() const { return weights_; }

 private:
  SparseMatrix mass_;
  Vector data_;
  Vector weights_;
};

BoundaryTerms boundary_terms(const Mesh& mesh, std::span<const double> u, const ScalarFn& inflow_value,
                             const VelocityField& velocity);

/// Nodal interpolant of f.
Vector interpolate(const Mesh& mesh, const ScalarFn& f);

}  // namespace fluxpot
