#pragma once

#include <span>

#include "fluxpot/flux.hpp"
#include "fluxpot/sparse.hpp"

namespace fluxpot {

/// D with d_ij = max(-k_ij, 0, -k_ji) off the diagonal and zero row sums.
/// The pattern of k must be structurally symmetric and contain the diagonal.
SparseMatrix artificial_diffusion(const SparseMatrix& k);

struct GlobalBox {
  double lo = 0.0;
  double hi = 1.0;
};
struct LocalStencil {};

enum class BoundsMode { GlobalBox, LocalStencil };

struct NodalBounds {
  Vector u_min;
  Vector u_max;
  BoundsMode mode = BoundsMode::LocalStencil;

  std::size_t size() const { return u_min.size(); }
};

/// Constant box bounds for every node; throws ContractViolation when lo > hi.
NodalBounds local_bounds(std::size_t n, GlobalBox box);
/// u_min_i = min_{j in N_i} u_j, u_max_i = max_{j in N_i} u_j.
NodalBounds local_bounds(std::span<const double> u, const SparsityPattern& stencil);
/// Componentwise hull of two bound sets.
NodalBounds merge(const NodalBounds& a, const NodalBounds& b);

/// FCT limiter: f*_ij = alpha_ij f_ij with alpha_ij = alpha_ji in [0, 1]
/// chosen so that u_low + dt/m_i sum_j f*_ij stays inside the bounds.
FluxSet fct_limit(const FluxSet& f, std::span<const double> u_low, const NodalBounds& bounds,
                  std::span<const double> lumped_mass, double dt);

/// Monolithic convex limiting with bar states. Without an advection matrix the
/// bar state is (u_i + u_j) / 2 with weight 2 d_ij. With `advection` the low-order
/// edge contribution (k_ij + d_ij)(u_j - u_i) is written as w_ij (ubar_ij - u_i),
/// w_ij = max(2 d_ij, k_ij + d_ij), so that every bar state lies between u_i and u_j.
/// The limited flux keeps ubar_ij + f*_ij / w_ij inside [u_i^min, u_i^max] and
/// ubar_ji - f*_ij / w_ji inside [u_j^min, u_j^max].
FluxSet mcl_limit(const FluxSet& f, std::span<const double> u, const SparseMatrix& diffusion,
                  const NodalBounds& bounds, const SparseMatrix* advection = nullptr);

/// c_i = sum_{j != i} d_ij.
Vector diffusion_coefficients(const SparseMatrix& diffusion);

namespace serial {
FluxSet fct_limit(const FluxSet& f, std::span<const double> u_low, const NodalBounds& bounds,
                  std::span<const double> lumped_mass, double dt);
FluxSet mcl_limit(const FluxSet& f, std::span<const double> u, const SparseMatrix& diffusion,
                  const NodalBounds& bounds, const SparseMatrix* advection = nullptr);
}  // namespace serial

}  // namespace fluxpot
