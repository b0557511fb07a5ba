#include "fluxpot/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "fluxpot/error.hpp"

namespace fluxpot {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::GalerkinUnlimited: return "galerkin";
    case Scheme::FCT: return "fct";
    case Scheme::MCL: return "mcl";
    case Scheme::ObppFullyDiscrete: return "obpp";
    case Scheme::ObppSemiDiscrete: return "obpp-semi";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::GalerkinUnlimited, Scheme::FCT, Scheme::MCL, Scheme::ObppFullyDiscrete,
                   Scheme::ObppSemiDiscrete})
    if (name == to_string(s)) return s;
  throw ContractViolation("unknown scheme: " + name);
}

AdvectionSystem make_advection_system(const Mesh& mesh, const VelocityField& velocity,
                                      const ScalarFn& inflow_value, double mu, bool with_qp) {
  AdvectionSystem sys{classify_inflow(mesh, velocity.value), velocity, {}, {}, {}, {}, {}, {}, {}, {}};
  sys.mc = assemble(sys.mesh, op::ConsistentMass{});
  sys.ml = lumped_masses(sys.mc);
  sys.k = assemble(sys.mesh, op::Advection{velocity});
  sys.s = assemble(sys.mesh, op::StreamlineDiffusion{velocity});
  sys.d = artificial_diffusion(sys.k);
  sys.boundary = std::make_shared<BoundaryOperator>(sys.mesh, velocity, inflow_value);
  sys.mc_lu = std::make_shared<LuFactorization>(sys.mc);
  if (with_qp) sys.qp = std::make_shared<QPStructure>(sys.mc, mu);
  return sys;
}

DiffusionSystem make_diffusion_system(const Mesh& mesh, const DiffusionTensor& tensor,
                                      const ScalarFn& dirichlet, double mu, bool with_qp) {
  DiffusionSystem sys{mesh, {}, {}, {}, mesh.boundary_nodes(), Vector(mesh.num_nodes(), 0.0), {}};
  sys.mc = assemble(mesh, op::ConsistentMass{});
  sys.ml = lumped_masses(sys.mc);
  sys.k = assemble(mesh, op::AnisotropicStiffness{tensor});
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
    if (sys.fixed[i]) sys.dirichlet[i] = dirichlet(mesh.nodes()[i]);
  if (with_qp) sys.qp = std::make_shared<QPStructure>(sys.mc, mu, sys.fixed);
  return sys;
}

Vector steady_galerkin_solve(const DiffusionSystem& sys) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < sys.fixed.size(); ++i)
    if (!sys.fixed[i]) free.push_back(i);
  const Vector kd = spmv(sys.k, sys.dirichlet);
  Vector rhs(free.size());
  for (std::size_t a = 0; a < free.size(); ++a) rhs[a] = -kd[free[a]];
  const Vector uf = lu_solve(submatrix(sys.k, free), rhs);
  Vector u = sys.dirichlet;
  for (std::size_t a = 0; a < free.size(); ++a) u[free[a]] = uf[a];
  return u;
}

Vector deferred_correction_solve(const SparseMatrix& mc, std::span<const double> ml,
                                 std::span<const double> rhs, std::span<const double> u_n, int sweeps) {
  if (sweeps < 1) throw ContractViolation("deferred_correction_solve: sweeps must be at least 1");
  const std::size_t n = u_n.size();
  if (rhs.size() != n || ml.size() != n || mc.n_rows() != n)
    throw ContractViolation("deferred_correction_solve: size mismatch");
  Vector u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = u_n[i] + rhs[i] / ml[i];
  Vector du(n);
  for (int m = 1; m < sweeps; ++m) {
    for (std::size_t i = 0; i < n; ++i) du[i] = u[i] - u_n[i];
    const Vector mdu = spmv(mc, du);
    for (std::size_t i = 0; i < n; ++i) u[i] = u_n[i] + (rhs[i] - (mdu[i] - ml[i] * du[i])) / ml[i];
  }
  return u;
}

namespace {

std::pair<double, double> range_of(std::span<const double> u) {
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  return {*lo, *hi};
}

Vector lumped_update(std::span<const double> u, std::span<const double> ml, double dt,
                     std::span<const double> rate) {
  Vector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + dt * rate[i] / ml[i];
  return out;
}

Vector add_vec(std::span<const double> a, std::span<const double> b) {
  Vector out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

double max_cfl(std::span<const double> c, std::span<const double> ml, double dt) {
  double v = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) v = std::max(v, dt * c[i] / ml[i]);
  return v;
}

NodalBounds make_bounds(const BoundsSpec& spec, std::span<const double> u, const SparsityPattern& stencil) {
  if (spec.mode == BoundsMode::GlobalBox) return local_bounds(u.size(), spec.box);
  return local_bounds(u, stencil);
}

// Ingredients of one flux-corrected advection step. The target update is
// u + dt/m (r + (M_L - M_C) udot_target); the low-order update u + dt/m low_rate;
// low_rate + sum_j raw_ij reproduces the target and g*_ij = f*_ij + base_ij.
struct AdvectionStepData {
  Vector r;
  Vector target;
  Vector low_rate;
  FluxSet raw;
  FluxSet base;
  double expected_mass_change = 0.0;
};

AdvectionStepData advection_data(std::span<const double> u, std::span<const double> stream_state,
                                 std::span<const double> target, double dt, const AdvectionSystem& sys) {
  AdvectionStepData d;
  const BoundaryTerms bt = sys.boundary->terms(u);
  const Vector ku = spmv(sys.k, u);
  const Vector sw = spmv(sys.s, stream_state);
  const Vector du = spmv(sys.d, u);
  d.r.resize(u.size());
  d.low_rate.resize(u.size());
  double flow = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d.r[i] = ku[i] + bt.b[i] + 0.5 * dt * sw[i];
    d.low_rate[i] = ku[i] + du[i] + bt.b_tilde[i];
    flow += ku[i] + bt.b[i];
  }
  d.expected_mass_change = dt * flow;
  d.target.assign(target.begin(), target.end());
  d.raw = difference_flux(sys.d, u) + difference_flux(sys.s, stream_state, -0.5 * dt) + bt.f_b;
  if (norm_inf(target) > 0.0) d.raw += difference_flux(sys.mc, target);
  d.base = difference_flux(sys.d, u, -1.0) + difference_flux(sys.s, stream_state, 0.5 * dt) - bt.f_b;
  return d;
}

struct Correction {
  Vector u_next;
  Vector g;  // sum_j g*_ij
  std::optional<BarrierReport> barrier;
  bool backup_cfl_ok = true;
  double cfl = 0.0;
};

// FCT-limited antidiffusive fluxes for the data d.
FluxSet fct_fluxes(std::span<const double> u, const AdvectionStepData& d, const AdvectionSystem& sys,
                   const SchemeConfig& cfg, Vector* u_low_out = nullptr) {
  const Vector u_low = lumped_update(u, sys.ml, cfg.dt, d.low_rate);
  NodalBounds b = cfg.bounds.mode == BoundsMode::GlobalBox
                      ? local_bounds(u.size(), cfg.bounds.box)
                      : merge(local_bounds(u, *sys.mesh.pattern()), local_bounds(u_low, *sys.mesh.pattern()));
  if (u_low_out) *u_low_out = u_low;
  return fct_limit(d.raw, u_low, b, sys.ml, cfg.dt);
}

Correction closed_form_correction(std::span<const double> u, const AdvectionStepData& d,
                                  const AdvectionSystem& sys, const SchemeConfig& cfg) {
  FluxSet fstar;
  Correction c;
  switch (cfg.scheme) {
    case Scheme::GalerkinUnlimited:
      fstar = d.raw;
      break;
    case Scheme::FCT:
      fstar = fct_fluxes(u, d, sys, cfg);
      break;
    case Scheme::MCL: {
      const NodalBounds b = make_bounds(cfg.bounds, u, *sys.mesh.pattern());
      fstar = mcl_limit(d.raw, u, sys.d, b, &sys.k);
      c.cfl = max_cfl(diffusion_coefficients(sys.d), sys.ml, cfg.dt);
      break;
    }
    default:
      throw ContractViolation("closed_form_correction: not a closed-form scheme");
  }
  const Vector fsum = apply_fluxes(fstar);
  c.u_next = lumped_update(u, sys.ml, cfg.dt, add_vec(d.low_rate, fsum));
  c.g = apply_fluxes(fstar + d.base);
  return c;
}

// Solves the potential QP for rate r and returns sum_j g*_ij.
Correction obpp_correction(std::span<const double> u, std::span<const double> r,
                           std::span<const double> target, std::span<const double> warm,
                           const NodalBounds& bounds, const std::shared_ptr<const QPStructure>& qs,
                           std::span<const double> c_semi, const SchemeConfig& cfg) {
  if (!qs) throw ContractViolation("obpp step: system was built without QP structure");
  const bool semi = cfg.scheme == Scheme::ObppSemiDiscrete;
  const ConstraintScaling scaling = semi ? ConstraintScaling::semi_discrete(Vector(c_semi.begin(), c_semi.end()))
                                         : ConstraintScaling::fully_discrete(cfg.dt);
  const QPInstance qp = build_qp(semi ? QPVariant::SemiDiscrete : QPVariant::FullyDiscrete, qs, u, r,
                                 bounds, scaling, target);
  Correction c;
  const BackupResult backup = backup_potential(qp, r, u, bounds, scaling);
  c.backup_cfl_ok = backup.cfl_satisfied;
  BarrierResult res;
  try {
    res = barrier_newton_solve(qp, warm, cfg.barrier);
  } catch (const InfeasibleBackup&) {
    // Collapsed bounds leave no interior; the backup potential is then the only safe choice.
    if (qp.max_violation(backup.udot_backup) > 1e-9 * std::max(1.0, qp.scale())) throw;
    res.udot = backup.udot_backup;
    res.report.degenerate = true;
    res.report.objective_init = objective(qp, warm).value;
    res.report.objective_final = objective(qp, res.udot).value;
  }
  c.barrier = res.report;
  c.g = spmv(qs->laplacian(), res.udot);
  Vector rate(r.begin(), r.end());
  for (std::size_t i = 0; i < rate.size(); ++i)
    if (!qs->fixed_mask()[i]) rate[i] += c.g[i];
  c.u_next = lumped_update(u, qs->lumped_mass(), cfg.dt, rate);
  for (std::size_t i = 0; i < rate.size(); ++i)
    if (qs->fixed_mask()[i]) c.u_next[i] = u[i];
  if (semi) c.cfl = max_cfl(c_semi, qs->lumped_mass(), cfg.dt);
  return c;
}

Correction advection_correction(std::span<const double> u, const AdvectionStepData& d,
                                const AdvectionSystem& sys, const SchemeConfig& cfg) {
  if (cfg.scheme != Scheme::ObppFullyDiscrete && cfg.scheme != Scheme::ObppSemiDiscrete)
    return closed_form_correction(u, d, sys, cfg);
  // Initial guess reproducing the FCT solution: (M_L - M_C) udot = D u + sum_j F_ij.
  SchemeConfig fct_cfg = cfg;
  fct_cfg.bounds.mode = BoundsMode::LocalStencil;
  const FluxSet fstar = fct_fluxes(u, d, sys, fct_cfg);
  const FluxSet warm_fluxes = fstar + d.base + difference_flux(sys.d, u);
  const Vector warm = warm_start(*sys.qp, sys.d, u, warm_fluxes);
  const NodalBounds b = make_bounds(cfg.bounds, u, *sys.mesh.pattern());
  return obpp_correction(u, d.r, d.target, warm, b, sys.qp, diffusion_coefficients(sys.d), cfg);
}

StepDiagnostics diagnostics(std::span<const double> u, const Correction& c, std::span<const double> ml,
                            double expected) {
  StepDiagnostics diag;
  std::tie(diag.u_min, diag.u_max) = range_of(c.u_next);
  diag.correction_sum = sum(c.g);
  diag.correction_abs = norm1(c.g);
  for (std::size_t i = 0; i < u.size(); ++i) diag.mass_change += ml[i] * (c.u_next[i] - u[i]);
  diag.expected_mass_change = expected;
  diag.cfl = c.cfl;
  diag.barrier = c.barrier;
  diag.backup_cfl_ok = c.backup_cfl_ok;
  return diag;
}

double lumped_l2_rate(std::span<const double> u, std::span<const double> u_next, std::span<const double> ml,
                      double dt) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double v = (u_next[i] - u[i]) / dt;
    s += ml[i] * v * v;
  }
  return std::sqrt(s);
}

void check_step(std::span<const double> u, const SchemeConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ContractViolation("time step must be positive");
  if (!all_finite(u)) throw ContractViolation("state contains non-finite values");
}

}  // namespace

StepResult ttg4a_step(std::span<const double> u, const AdvectionSystem& sys, const SchemeConfig& cfg) {
  check_step(u, cfg);
  const double dt = cfg.dt;
  const Vector b = sys.boundary->b(u);
  const Vector ku = spmv(sys.k, u);
  const Vector su = spmv(sys.s, u);
  Vector rhs1(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) rhs1[i] = dt / 3.0 * (ku[i] + b[i]) + dt * dt / 12.0 * su[i];
  Vector u13;
  if (cfg.exact_mass_solve) {
    u13 = add_vec(u, sys.mc_lu->solve(rhs1));
  } else {
    u13 = deferred_correction_solve(sys.mc, sys.ml, rhs1, u, cfg.deferred_correction_sweeps);
  }
  const Vector su13 = spmv(sys.s, u13);
  Vector rhs2(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) rhs2[i] = ku[i] + b[i] + 0.5 * dt * su13[i];
  const Vector udot_t = sys.mc_lu->solve(rhs2);

  const AdvectionStepData d = advection_data(u, u13, udot_t, dt, sys);
  const Correction c = advection_correction(u, d, sys, cfg);
  return {c.u_next, diagnostics(u, c, sys.ml, d.expected_mass_change)};
}

PseudoStepResult lw_pseudo_step(std::span<const double> u, const AdvectionSystem& sys,
                                const SchemeConfig& cfg) {
  check_step(u, cfg);
  const Vector zero(u.size(), 0.0);
  const AdvectionStepData d = advection_data(u, u, zero, cfg.dt, sys);
  const Correction c = advection_correction(u, d, sys, cfg);
  PseudoStepResult out{c.u_next, lumped_l2_rate(u, c.u_next, sys.ml, cfg.dt),
                       diagnostics(u, c, sys.ml, d.expected_mass_change)};
  return out;
}

PseudoStepResult diffusion_step(std::span<const double> u, const DiffusionSystem& sys,
                                const SchemeConfig& cfg) {
  check_step(u, cfg);
  Vector r = spmv(sys.k, u);
  double expected = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (sys.fixed[i]) r[i] = 0.0;
    expected += cfg.dt * r[i];
  }
  Correction c;
  switch (cfg.scheme) {
    case Scheme::GalerkinUnlimited:
      c.u_next = lumped_update(u, sys.ml, cfg.dt, r);
      c.g.assign(u.size(), 0.0);
      break;
    case Scheme::ObppFullyDiscrete:
    case Scheme::ObppSemiDiscrete: {
      Vector c_semi(u.size(), 0.0);
      const auto& p = sys.k.pattern();
      for (std::size_t k = 0; k < sys.k.nnz(); ++k)
        if (p.row_of(k) != p.col_of(k)) c_semi[p.row_of(k)] += std::abs(sys.k.values()[k]);
      const NodalBounds b = make_bounds(cfg.bounds, u, *sys.mesh.pattern());
      const Vector zero(u.size(), 0.0);
      c = obpp_correction(u, r, zero, zero, b, sys.qp, c_semi, cfg);
      break;
    }
    default:
      throw ContractViolation("diffusion_step: FCT and MCL are not defined for the diffusion problem");
  }
  Vector g_free = c.g;
  for (std::size_t i = 0; i < g_free.size(); ++i)
    if (sys.fixed[i]) g_free[i] = 0.0;
  StepDiagnostics diag = diagnostics(u, c, sys.ml, expected + cfg.dt * sum(g_free));
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (sys.fixed[i]) continue;
    const double v = (c.u_next[i] - u[i]) / cfg.dt;
    s += sys.ml[i] * v * v;
  }
  return {c.u_next, std::sqrt(s), diag};
}

MarchResult march_to_steady(const SteadyProblem& problem, Vector u0, const SchemeConfig& cfg,
                            const StepObserver& observer) {
  if (!(cfg.dt > 0.0) || cfg.t_final < 0.0) throw ContractViolation("march_to_steady: invalid time settings");
  MarchResult res;
  res.u = std::move(u0);
  double first = -1.0;
  const auto n_steps = static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
  for (long step = 0; step < n_steps; ++step) {
    PseudoStepResult r = std::visit(
        [&](const auto* sys) {
          using T = std::decay_t<decltype(*sys)>;
          if constexpr (std::is_same_v<T, AdvectionSystem>)
            return lw_pseudo_step(res.u, *sys, cfg);
          else
            return diffusion_step(res.u, *sys, cfg);
        },
        problem);
    if (!std::isfinite(r.residual_norm)) throw Diverged("march_to_steady: non-finite residual");
    if (first < 0.0) first = r.residual_norm;
    if (r.residual_norm > 1e6 * std::max(first, 1e-300))
      throw Diverged("march_to_steady: residual grew by more than 1e6");
    // The residual measures the incoming state, which is kept once it is steady.
    if (r.residual_norm < cfg.steady_residual_tol) {
      res.converged = true;
      res.history.push_back({static_cast<int>(step), res.time, r.residual_norm, r.diag.u_min, r.diag.u_max});
      break;
    }
    res.steps = static_cast<int>(step + 1);
    res.time = static_cast<double>(step + 1) * cfg.dt;
    res.history.push_back({res.steps, res.time, r.residual_norm, r.diag.u_min, r.diag.u_max});
    if (observer) observer(res.steps, res.time, r);
    res.u = std::move(r.u);
  }
  return res;
}

void write_history(const std::vector<HistoryEntry>& history, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_history: cannot open " + path);
  os.precision(17);
  os << "step,time,residual,u_min,u_max\n";
  for (const auto& h : history)
    os << h.step << ',' << h.time << ',' << h.residual << ',' << h.u_min << ',' << h.u_max << '\n';
}

}  // namespace fluxpot
