#include "fluxpot/limiters.hpp"

#include <algorithm>
#include <cmath>

#include "fluxpot/error.hpp"

namespace fluxpot {

SparseMatrix artificial_diffusion(const SparseMatrix& k) {
  const auto& p = k.pattern();
  if (!p.structurally_symmetric())
    throw ContractViolation("artificial_diffusion: pattern must be structurally symmetric");
  SparseMatrix d(k.pattern_ptr());
  auto vals = d.values();
  for (std::size_t e = 0; e < k.nnz(); ++e) {
    if (p.row_of(e) == p.col_of(e)) continue;
    vals[e] = std::max({-k.values()[e], 0.0, -k.values()[p.transpose(e)]});
  }
  for (std::size_t i = 0; i < p.n_rows(); ++i) {
    double s = 0.0;
    for (std::size_t e = p.row_begin(i); e < p.row_end(i); ++e)
      if (p.col_of(e) != i) s += vals[e];
    if (p.diagonal(i) == npos) throw ContractViolation("artificial_diffusion: pattern lacks a diagonal entry");
    vals[p.diagonal(i)] = -s;
  }
  return d;
}

NodalBounds local_bounds(std::size_t n, GlobalBox box) {
  if (box.lo > box.hi) throw ContractViolation("local_bounds: lower bound exceeds upper bound");
  return {Vector(n, box.lo), Vector(n, box.hi), BoundsMode::GlobalBox};
}

NodalBounds local_bounds(std::span<const double> u, const SparsityPattern& stencil) {
  if (u.size() != stencil.n_rows()) throw ContractViolation("local_bounds: size mismatch");
  NodalBounds b{Vector(u.size()), Vector(u.size()), BoundsMode::LocalStencil};
  const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double lo = u[i], hi = u[i];
    for (std::size_t k = stencil.row_begin(i); k < stencil.row_end(i); ++k) {
      lo = std::min(lo, u[stencil.col_of(k)]);
      hi = std::max(hi, u[stencil.col_of(k)]);
    }
    b.u_min[i] = lo;
    b.u_max[i] = hi;
  }
  return b;
}

NodalBounds merge(const NodalBounds& a, const NodalBounds& b) {
  if (a.size() != b.size()) throw ContractViolation("merge: size mismatch");
  NodalBounds m = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.u_min[i] = std::min(a.u_min[i], b.u_min[i]);
    m.u_max[i] = std::max(a.u_max[i], b.u_max[i]);
  }
  return m;
}

Vector diffusion_coefficients(const SparseMatrix& diffusion) {
  const auto& p = diffusion.pattern();
  Vector c(p.n_rows(), 0.0);
  for (std::size_t k = 0; k < diffusion.nnz(); ++k)
    if (p.row_of(k) != p.col_of(k)) c[p.row_of(k)] += diffusion.values()[k];
  return c;
}

namespace {

void check_sizes(const FluxSet& f, std::size_t n, const NodalBounds& bounds) {
  if (f.pattern().n_rows() != n || bounds.size() != n)
    throw ContractViolation("limiter: size mismatch");
}

struct FctRatios {
  double plus;
  double minus;
};

FctRatios fct_ratios(const FluxSet& f, std::size_t i, std::span<const double> u_low,
                             const NodalBounds& bounds, double m_over_dt) {
  const auto& p = f.pattern();
  double p_plus = 0.0, p_minus = 0.0;
  for (std::size_t k = p.row_begin(i); k < p.row_end(i); ++k) {
    if (p.col_of(k) == i) continue;
    p_plus += std::max(0.0, f[k]);
    p_minus += std::min(0.0, f[k]);
  }
  const double q_plus = m_over_dt * (bounds.u_max[i] - u_low[i]);
  const double q_minus = m_over_dt * (bounds.u_min[i] - u_low[i]);
  FctRatios r{1.0, 1.0};
  if (p_plus > 0.0) r.plus = std::clamp(q_plus / p_plus, 0.0, 1.0);
  if (p_minus < 0.0) r.minus = std::clamp(q_minus / p_minus, 0.0, 1.0);
  return r;
}

double fct_alpha(double f_ij, const FctRatios& ri, const FctRatios& rj) {
  return f_ij > 0.0 ? std::min(ri.plus, rj.minus) : std::min(ri.minus, rj.plus);
}

struct BarState {
  double value;
  double weight;
};

BarState bar_state(std::size_t k, std::span<const double> u, const SparseMatrix& diffusion,
                   const SparseMatrix* advection) {
  const auto& p = diffusion.pattern();
  const std::size_t i = p.row_of(k), j = p.col_of(k);
  const double d = diffusion.values()[k];
  if (!advection) return {0.5 * (u[i] + u[j]), 2.0 * d};
  const double a = advection->values()[k] + d;
  const double w = std::max(2.0 * d, a);
  if (w <= 0.0) return {u[i], 0.0};
  return {u[i] + a * (u[j] - u[i]) / w, w};
}

double mcl_edge(double f_ij, const BarState& ij, const BarState& ji, std::size_t i, std::size_t j,
                const NodalBounds& b) {
  if (f_ij == 0.0 || ij.weight <= 0.0 || ji.weight <= 0.0) return 0.0;
  if (f_ij > 0.0) {
    const double lim = std::min({f_ij, ij.weight * (b.u_max[i] - ij.value),
                                 ji.weight * (ji.value - b.u_min[j])});
    return std::max(0.0, lim);
  }
  const double lim = std::max({f_ij, ij.weight * (b.u_min[i] - ij.value),
                               ji.weight * (ji.value - b.u_max[j])});
  return std::min(0.0, lim);
}

void check_advection(const SparseMatrix& diffusion, const SparseMatrix* advection) {
  if (advection && !advection->same_pattern(diffusion))
    throw ContractViolation("mcl_limit: advection and diffusion patterns differ");
}

}  // namespace

FluxSet fct_limit(const FluxSet& f, std::span<const double> u_low, const NodalBounds& bounds,
                  std::span<const double> lumped_mass, double dt) {
  const std::size_t n = u_low.size();
  check_sizes(f, n, bounds);
  const auto& p = f.pattern();
  std::vector<FctRatios> r(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i)
    r[i] = fct_ratios(f, static_cast<std::size_t>(i), u_low, bounds, lumped_mass[i] / dt);

  FluxSet out(f.pattern_ptr());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i)
    for (std::size_t k = p.row_begin(i); k < p.row_end(i); ++k) {
      const std::size_t j = p.col_of(k);
      if (j == static_cast<std::size_t>(i)) continue;
      // alpha_ij = alpha_ji: evaluate from the positive-flux side of the edge.
      const double fk = f[k];
      const double alpha = fk >= 0.0 ? fct_alpha(fk, r[i], r[j])
                                     : fct_alpha(-fk, r[j], r[i]);
      out[k] = alpha * fk;
    }
  return out;
}

FluxSet mcl_limit(const FluxSet& f, std::span<const double> u, const SparseMatrix& diffusion,
                  const NodalBounds& bounds, const SparseMatrix* advection) {
  check_sizes(f, u.size(), bounds);
  check_advection(diffusion, advection);
  const auto& p = f.pattern();
  FluxSet out(f.pattern_ptr());
  const auto n = static_cast<std::ptrdiff_t>(u.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::size_t k = p.row_begin(i); k < p.row_end(i); ++k) {
      const std::size_t j = p.col_of(k);
      if (j == static_cast<std::size_t>(i)) continue;
      const std::size_t t = p.transpose(k);
      const BarState ij = bar_state(k, u, diffusion, advection);
      const BarState ji = bar_state(t, u, diffusion, advection);
      // Evaluate on the positive-flux side and mirror so that f*_ji = -f*_ij exactly.
      if (f[k] >= 0.0)
        out[k] = mcl_edge(f[k], ij, ji, static_cast<std::size_t>(i), j, bounds);
      else
        out[k] = -mcl_edge(f[t], ji, ij, j, static_cast<std::size_t>(i), bounds);
    }
  return out;
}

namespace serial {

FluxSet fct_limit(const FluxSet& f, std::span<const double> u_low, const NodalBounds& bounds,
                  std::span<const double> lumped_mass, double dt) {
  const std::size_t n = u_low.size();
  check_sizes(f, n, bounds);
  const auto& p = f.pattern();
  Vector p_plus(n, 0.0), p_minus(n, 0.0);
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (p.row_of(k) == p.col_of(k)) continue;
    p_plus[p.row_of(k)] += std::max(0.0, f[k]);
    p_minus[p.row_of(k)] += std::min(0.0, f[k]);
  }
  Vector r_plus(n, 1.0), r_minus(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double q_plus = lumped_mass[i] / dt * (bounds.u_max[i] - u_low[i]);
    const double q_minus = lumped_mass[i] / dt * (bounds.u_min[i] - u_low[i]);
    if (p_plus[i] > 0.0) r_plus[i] = std::clamp(q_plus / p_plus[i], 0.0, 1.0);
    if (p_minus[i] < 0.0) r_minus[i] = std::clamp(q_minus / p_minus[i], 0.0, 1.0);
  }
  FluxSet out(f.pattern_ptr());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const std::size_t i = p.row_of(k), j = p.col_of(k);
    if (i == j) continue;
    const double alpha = f[k] >= 0.0 ? std::min(r_plus[i], r_minus[j])
                                     : std::min(r_plus[j], r_minus[i]);
    out[k] = alpha * f[k];
  }
  return out;
}

FluxSet mcl_limit(const FluxSet& f, std::span<const double> u, const SparseMatrix& diffusion,
                  const NodalBounds& bounds, const SparseMatrix* advection) {
  check_sizes(f, u.size(), bounds);
  check_advection(diffusion, advection);
  const auto& p = f.pattern();
  FluxSet out(f.pattern_ptr());
  for (std::size_t k = 0; k < f.size(); ++k) {
    const std::size_t i = p.row_of(k), j = p.col_of(k);
    if (i == j) continue;
    const std::size_t t = p.transpose(k);
    const BarState ij = bar_state(k, u, diffusion, advection);
    const BarState ji = bar_state(t, u, diffusion, advection);
    out[k] = f[k] >= 0.0 ? mcl_edge(f[k], ij, ji, i, j, bounds) : -mcl_edge(f[t], ji, ij, j, i, bounds);
  }
  return out;
}

}  // namespace serial

}  // namespace fluxpot
