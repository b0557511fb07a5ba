#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>

#include "fluxpot/assembly.hpp"
#include "fluxpot/barrier.hpp"
#include "fluxpot/limiters.hpp"
#include "fluxpot/linalg.hpp"
#include "fluxpot/mesh.hpp"
#include "fluxpot/obpp.hpp"

namespace fluxpot {

enum class Scheme { GalerkinUnlimited, FCT, MCL, ObppFullyDiscrete, ObppSemiDiscrete };

const char* to_string(Scheme s);
/// Accepts galerkin, fct, mcl, obpp (fully discrete) and obpp-semi.
Scheme parse_scheme(const std::string& name);

struct BoundsSpec {
  BoundsMode mode = BoundsMode::LocalStencil;
  GlobalBox box;
};

struct SchemeConfig {
  Scheme scheme = Scheme::GalerkinUnlimited;
  double dt = 1e-3;
  double t_final = 0.0;
  double courant = 0.0;
  /// Number of deferred-correction iterates including the lumped initial guess.
  int deferred_correction_sweeps = 3;
  /// Use the exact M_C factorization for the first TTG-4A stage.
  bool exact_mass_solve = false;
  double steady_residual_tol = 1e-12;
  BoundsSpec bounds;
  BarrierConfig barrier;
};

/// Matrices of an advection problem with weak inflow conditions.
struct AdvectionSystem {
  Mesh mesh;
  VelocityField velocity;
  SparseMatrix mc;
  Vector ml;
  SparseMatrix k;
  SparseMatrix s;
  SparseMatrix d;
  std::shared_ptr<const BoundaryOperator> boundary;
  std::shared_ptr<const LuFactorization> mc_lu;
  /// Only present when built for OB-PP.
  std::shared_ptr<const QPStructure> qp;
};

/// Classifies inflow faces of `mesh` for `velocity` and assembles everything.
AdvectionSystem make_advection_system(const Mesh& mesh, const VelocityField& velocity,
                                      const ScalarFn& inflow_value, double mu, bool with_qp);

/// Stiffness problem with strongly imposed Dirichlet values on `fixed` nodes.
struct DiffusionSystem {
  Mesh mesh;
  SparseMatrix mc;
  Vector ml;
  SparseMatrix k;
  std::vector<bool> fixed;
  Vector dirichlet;  // values on fixed nodes, zero elsewhere
  std::shared_ptr<const QPStructure> qp;
};

DiffusionSystem make_diffusion_system(const Mesh& mesh, const DiffusionTensor& tensor,
                                      const ScalarFn& dirichlet, double mu, bool with_qp);

/// Direct solve of K_ff u_f = -K_fD u_D.
Vector steady_galerkin_solve(const DiffusionSystem& sys);

struct StepDiagnostics {
  double u_min = 0.0;
  double u_max = 0.0;
  /// sum_i g*_i and sum_i |g*_i| of the flux correction.
  double correction_sum = 0.0;
  double correction_abs = 0.0;
  /// sum m_i (u_next - u) and the value dt * sum_i (boundary and K terms) it must match.
  double mass_change = 0.0;
  double expected_mass_change = 0.0;
  /// Largest dt c_i / m_i of the scheme's convexity condition; > 1 means the CFL condition fails.
  double cfl = 0.0;
  std::optional<BarrierReport> barrier;
  bool backup_cfl_ok = true;
};

struct StepResult {
  Vector u;
  StepDiagnostics diag;
};

/// M_L u^(m) = M_L u^n + rhs - (M_C - M_L)(u^(m-1) - u^n) starting from the
/// lumped update u^(1) = u^n + M_L^{-1} rhs; returns u^(sweeps).
Vector deferred_correction_solve(const SparseMatrix& mc, std::span<const double> ml,
                                 std::span<const double> rhs, std::span<const double> u_n, int sweeps);

/// One step of the two-stage fourth-order Taylor-Galerkin scheme with the flux
/// correction selected by cfg.scheme.
StepResult ttg4a_step(std::span<const double> u, const AdvectionSystem& sys, const SchemeConfig& cfg);

struct PseudoStepResult {
  Vector u;
  double residual_norm = 0.0;
  StepDiagnostics diag;
};

/// One lumped-mass Lax-Wendroff pseudo-time step towards the steady state of
/// div(v u) = 0; residual_norm is the lumped L2 norm of (u_next - u) / dt.
PseudoStepResult lw_pseudo_step(std::span<const double> u, const AdvectionSystem& sys,
                                const SchemeConfig& cfg);

/// m_i (u_next_i - u_i) / dt = (K u)_i + g*_i on free nodes; fixed nodes keep their values.
PseudoStepResult diffusion_step(std::span<const double> u, const DiffusionSystem& sys,
                                const SchemeConfig& cfg);

struct HistoryEntry {
  int step = 0;
  double time = 0.0;
  double residual = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
};

struct MarchResult {
  Vector u;
  std::vector<HistoryEntry> history;
  int steps = 0;
  double time = 0.0;
  bool converged = false;
};

using SteadyProblem = std::variant<const AdvectionSystem*, const DiffusionSystem*>;
using StepObserver = std::function<void(int step, double time, const PseudoStepResult&)>;

/// Pseudo-time marching until t >= cfg.t_final or the residual drops below
/// cfg.steady_residual_tol. Throws Diverged when the residual exceeds 1e6 times
/// its first value.
MarchResult march_to_steady(const SteadyProblem& problem, Vector u0, const SchemeConfig& cfg,
                            const StepObserver& observer = {});

/// Residual history CSV: step,time,residual,u_min,u_max.
void write_history(const std::vector<HistoryEntry>& history, const std::string& path);

}  // namespace fluxpot
