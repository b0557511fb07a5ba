#include "fluxpot/obpp.hpp"

#include <algorithm>
#include <cmath>

#include "fluxpot/error.hpp"

namespace fluxpot {

namespace {

SchurPlan build_schur_plan(const SparseMatrix& l, const SparseMatrix& h) {
  const auto& lp = l.pattern();
  const std::size_t n = lp.n_rows();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = lp.row_begin(k); a < lp.row_end(k); ++a)
      for (std::size_t b = lp.row_begin(k); b < lp.row_end(k); ++b)
        pairs.emplace_back(lp.col_of(a), lp.col_of(b));
  for (std::size_t e = 0; e < h.nnz(); ++e) pairs.emplace_back(h.pattern().row_of(e), h.pattern().col_of(e));

  SchurPlan plan;
  plan.pattern = SparsityPattern::from_pairs(n, n, std::move(pairs));
  plan.hessian_slot.resize(h.nnz());
  for (std::size_t e = 0; e < h.nnz(); ++e)
    plan.hessian_slot[e] = plan.pattern->find(h.pattern().row_of(e), h.pattern().col_of(e));
  // L is symmetric, so (L W L)_ij = sum_k l_ki w_k l_kj.
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = lp.row_begin(k); a < lp.row_end(k); ++a)
      for (std::size_t b = lp.row_begin(k); b < lp.row_end(k); ++b)
        plan.terms.push_back({plan.pattern->find(lp.col_of(a), lp.col_of(b)), k,
                              l.values()[a] * l.values()[b]});
  std::sort(plan.terms.begin(), plan.terms.end(),
            [](const SchurPlan::Term& x, const SchurPlan::Term& y) { return x.slot < y.slot; });
  return plan;
}

}  // namespace

QPStructure::QPStructure(SparseMatrix consistent_mass, double mu, std::vector<bool> fixed)
    : mc_(std::move(consistent_mass)), mu_(mu), fixed_(std::move(fixed)) {
  if (!(mu >= 0.0)) throw ContractViolation("QPStructure: mu must be nonnegative");
  if (mc_.n_rows() != mc_.n_cols()) throw ContractViolation("QPStructure: mass matrix not square");
  ml_ = mc_.row_sums();
  for (double m : ml_)
    if (!(m > 0.0)) throw ContractViolation("QPStructure: nonpositive lumped mass");
  const std::size_t n = ml_.size();
  if (fixed_.empty()) fixed_.assign(n, false);
  if (fixed_.size() != n) throw ContractViolation("QPStructure: fixed mask size mismatch");

  laplacian_ = scaled(mc_, -1.0);
  for (std::size_t i = 0; i < n; ++i) laplacian_.values()[mc_.pattern().diagonal(i)] += ml_[i];

  for (std::size_t i = 0; i < n; ++i)
    if (!fixed_[i]) free_.push_back(i);
  if (free_.empty()) throw ContractViolation("QPStructure: every potential is fixed");

  reduced_laplacian_ = has_fixed() ? submatrix(laplacian_, free_) : laplacian_;
  const SparseMatrix h = add(mc_, laplacian_, 1.0, mu_);
  reduced_hessian_ = has_fixed() ? submatrix(h, free_) : h;
  plan_ = build_schur_plan(reduced_laplacian_, reduced_hessian_);

  if (has_fixed())
    dirichlet_ = std::make_unique<LuFactorization>(reduced_laplacian_);
  else
    neumann_ = std::make_unique<NeumannSolver>(reduced_laplacian_);
  hessian_lu_ = std::make_unique<LuFactorization>(reduced_hessian_);
}

Vector QPStructure::solve_laplacian(std::span<const double> reduced_rhs) const {
  if (reduced_rhs.size() != num_free()) throw ContractViolation("solve_laplacian: size mismatch");
  return dirichlet_ ? dirichlet_->solve(reduced_rhs) : neumann_->solve(reduced_rhs);
}

Vector QPStructure::solve_hessian(std::span<const double> reduced_rhs) const {
  if (reduced_rhs.size() != num_free()) throw ContractViolation("solve_hessian: size mismatch");
  return hessian_lu_->solve(reduced_rhs);
}

Vector QPStructure::expand(std::span<const double> reduced) const {
  if (reduced.size() != num_free()) throw ContractViolation("expand: size mismatch");
  Vector full(num_nodes(), 0.0);
  for (std::size_t a = 0; a < free_.size(); ++a) full[free_[a]] = reduced[a];
  return full;
}

Vector QPStructure::restrict(std::span<const double> full) const {
  if (full.size() != num_nodes()) throw ContractViolation("restrict: size mismatch");
  Vector r(free_.size());
  for (std::size_t a = 0; a < free_.size(); ++a) r[a] = full[free_[a]];
  return r;
}

SparseMatrix QPInstance::constraint_matrix() const {
  const auto& l = structure->reduced_laplacian();
  return vstack(l, scaled(l, -1.0));
}

Vector QPInstance::constraint_rhs() const {
  Vector b(upper);
  for (double lo : lower) b.push_back(-lo);
  return b;
}

Vector QPInstance::slack(std::span<const double> udot) const {
  const Vector lu = spmv(structure->reduced_laplacian(), structure->restrict(udot));
  const std::size_t m = lu.size();
  Vector s(2 * m);
  for (std::size_t i = 0; i < m; ++i) {
    s[i] = upper[i] - lu[i];
    s[m + i] = lu[i] - lower[i];
  }
  return s;
}

double QPInstance::max_violation(std::span<const double> udot) const {
  double v = 0.0;
  for (double s : slack(udot)) v = std::max(v, -s);
  return v;
}

double QPInstance::scale() const {
  return std::max(norm_inf(upper), norm_inf(lower));
}

QPInstance build_qp(QPVariant variant, std::shared_ptr<const QPStructure> structure,
                    std::span<const double> u, std::span<const double> r, const NodalBounds& bounds,
                    const ConstraintScaling& scaling, std::span<const double> target) {
  if (!structure) throw ContractViolation("build_qp: missing structure");
  const std::size_t n = structure->num_nodes();
  if (u.size() != n || r.size() != n || bounds.size() != n || target.size() != n)
    throw ContractViolation("build_qp: size mismatch");
  if (variant == QPVariant::FullyDiscrete && !(scaling.dt > 0.0))
    throw ContractViolation("build_qp: time step must be positive");
  if (variant == QPVariant::SemiDiscrete && scaling.c.size() != n)
    throw ContractViolation("build_qp: rate coefficients size mismatch");

  QPInstance qp;
  qp.structure = structure;
  qp.variant = variant;
  qp.target.assign(target.begin(), target.end());
  const auto free = structure->free_nodes();
  qp.lower.resize(free.size());
  qp.upper.resize(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) {
    const std::size_t i = free[a];
    if (bounds.u_min[i] > bounds.u_max[i]) throw ContractViolation("build_qp: lower bound exceeds upper bound");
    const double c = variant == QPVariant::FullyDiscrete ? structure->lumped_mass()[i] / scaling.dt
                                                         : scaling.c[i];
    qp.upper[a] = c * (bounds.u_max[i] - u[i]) - r[i];
    qp.lower[a] = c * (bounds.u_min[i] - u[i]) - r[i];
  }
  return qp;
}

ObjectiveEval objective(const QPInstance& qp, std::span<const double> udot) {
  const auto& s = *qp.structure;
  if (udot.size() != s.num_nodes()) throw ContractViolation("objective: size mismatch");
  Vector diff(udot.begin(), udot.end());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= qp.target[i];
  const Vector md = spmv(s.consistent_mass(), diff);
  const Vector lu = spmv(s.laplacian(), udot);
  ObjectiveEval e;
  e.value = 0.5 * dot(diff, md) + 0.5 * s.mu() * dot(udot, lu);
  e.gradient.resize(diff.size());
  for (std::size_t i = 0; i < diff.size(); ++i) e.gradient[i] = md[i] + s.mu() * lu[i];
  return e;
}

SparseMatrix objective_hessian(const QPInstance& qp) {
  return add(qp.structure->consistent_mass(), qp.structure->laplacian(), 1.0, qp.mu());
}

Vector reconstruct_state(const QPStructure& s, std::span<const double> u, std::span<const double> r,
                         double dt, std::span<const double> udot) {
  const Vector lu = spmv(s.laplacian(), udot);
  Vector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = u[i] + dt / s.lumped_mass()[i] * (r[i] + (s.fixed_mask()[i] ? 0.0 : lu[i]));
  return out;
}

BackupResult backup_potential(const QPInstance& qp, std::span<const double> r,
                              std::span<const double> u, const NodalBounds& bounds,
                              const ConstraintScaling& scaling) {
  const auto& s = *qp.structure;
  const std::size_t n = s.num_nodes();
  if (r.size() != n || u.size() != n || bounds.size() != n)
    throw ContractViolation("backup_potential: size mismatch");

  BackupResult out;
  out.r_backup.assign(n, 0.0);
  out.omega.assign(n, 0.0);
  double rho = 0.0, r_abs = 0.0;
  for (std::size_t i : s.free_nodes()) {
    rho += r[i];
    r_abs += std::abs(r[i]);
  }
  out.rho = rho;
  double omega_sum = 0.0;
  if (rho != 0.0)
    for (std::size_t i : s.free_nodes()) {
      out.omega[i] = rho > 0.0 ? bounds.u_max[i] - u[i] : bounds.u_min[i] - u[i];
      omega_sum += out.omega[i];
    }
  if (rho != 0.0 && omega_sum == 0.0) {
    // With collapsed bounds r is often pure cancellation error, so compare against the
    // size of the constraint terms as well.
    double terms = r_abs;
    for (std::size_t i : s.free_nodes()) {
      const double c = qp.variant == QPVariant::FullyDiscrete ? s.lumped_mass()[i] / scaling.dt : scaling.c[i];
      terms += c * (std::abs(u[i]) + std::abs(bounds.u_min[i]) + std::abs(bounds.u_max[i]));
    }
    if (std::abs(rho) > 1e-13 * terms)
      throw InfeasibleBackup("backup_potential: no node can absorb the total residual");
    for (std::size_t i : s.free_nodes()) out.r_backup[i] = rho / static_cast<double>(s.num_free());
    rho = 0.0;
  }
  if (rho != 0.0) {
    out.c_backup = rho / omega_sum;
    for (std::size_t i : s.free_nodes()) out.r_backup[i] = out.omega[i] * out.c_backup;
  }

  if (qp.variant == QPVariant::FullyDiscrete) {
    double m_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : s.free_nodes()) m_min = std::min(m_min, s.lumped_mass()[i]);
    out.cfl_satisfied = scaling.dt * out.c_backup <= m_min * (1.0 + 1e-12);
  } else {
    double c_min = std::numeric_limits<double>::infinity();
    for (std::size_t i : s.free_nodes()) c_min = std::min(c_min, scaling.c[i]);
    out.cfl_satisfied = out.c_backup <= c_min * (1.0 + 1e-12);
  }

  Vector rhs(s.num_free());
  const auto free = s.free_nodes();
  for (std::size_t a = 0; a < free.size(); ++a) rhs[a] = out.r_backup[free[a]] - r[free[a]];
  out.udot_backup = s.expand(s.solve_laplacian(rhs));
  return out;
}

Vector warm_start(const QPStructure& structure, const SparseMatrix& diffusion,
                  std::span<const double> u, const FluxSet& fluxes) {
  Vector rhs = spmv(diffusion, u);
  const Vector g = apply_fluxes(fluxes);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += g[i];
  Vector reduced = structure.restrict(rhs);
  if (!structure.has_fixed()) {
    // Remove round-off so the Neumann consistency check only fires on real errors.
    // Cancellation is measured against the size of the terms, not of the result.
    const double terms = diffusion.norm_inf() * norm_inf(u) * static_cast<double>(u.size()) + fluxes.sum_abs();
    const double mean = sum(reduced) / static_cast<double>(reduced.size());
    if (std::abs(mean) * static_cast<double>(reduced.size()) <= 1e-10 * std::max(terms, 1e-300))
      for (double& v : reduced) v -= mean;
  }
  return structure.expand(structure.solve_laplacian(reduced));
}

Vector interior_potential(const QPInstance& qp) {
  const auto& s = *qp.structure;
  double kappa = 0.5;
  if (!s.has_fixed()) {
    double sum_lo = 0.0, sum_gap = 0.0;
    for (std::size_t a = 0; a < qp.lower.size(); ++a) {
      sum_lo += qp.lower[a];
      sum_gap += qp.upper[a] - qp.lower[a];
    }
    kappa = sum_gap > 0.0 ? -sum_lo / sum_gap : 0.0;
    if (!(kappa > 0.0 && kappa < 1.0))
      throw InfeasibleBackup("interior_potential: feasible set has no interior");
  }
  Vector y(qp.lower.size());
  for (std::size_t a = 0; a < y.size(); ++a) {
    if (!(qp.upper[a] > qp.lower[a]))
      throw InfeasibleBackup("interior_potential: degenerate bounds");
    y[a] = qp.lower[a] + kappa * (qp.upper[a] - qp.lower[a]);
  }
  if (!s.has_fixed()) {
    const double mean = sum(y) / static_cast<double>(y.size());
    for (double& v : y) v -= mean;
  }
  return s.expand(s.solve_laplacian(y));
}

Vector strictly_feasible_start(const QPInstance& qp, std::span<const double> candidate,
                               std::span<const double> interior, double margin) {
  const Vector sc = qp.slack(candidate);
  const Vector si = qp.slack(interior);
  // slack(theta) = theta sc + (1 - theta) si is affine in theta.
  double theta = 1.0;
  for (std::size_t k = 0; k < sc.size(); ++k) {
    const double need = margin * si[k];
    if (sc[k] >= need) continue;
    theta = std::min(theta, (si[k] - need) / (si[k] - sc[k]));
  }
  theta = std::max(theta, 0.0);
  if (theta == 1.0) return Vector(candidate.begin(), candidate.end());
  Vector out(candidate.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = theta * candidate[i] + (1.0 - theta) * interior[i];
  return out;
}

FluxSet potentials_to_fluxes(const SparseMatrix& consistent_mass, std::span<const double> udot) {
  return difference_flux(consistent_mass, udot);
}

}  // namespace fluxpot
