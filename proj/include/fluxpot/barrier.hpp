#pragma once

#include <string>
#include <vector>

#include "fluxpot/obpp.hpp"

namespace fluxpot {

struct BarrierConfig {
  /// Initial barrier parameter; nonpositive means max(1, f_mu(init)).
  double sigma0 = 0.0;
  double sigma_min = 1e-8;
  double sigma_shrink = 0.1;
  /// Move to the next barrier level once f_new >= improvement * f_old.
  double improvement = 0.999;
  double fraction_to_boundary = 0.995;
  int max_newton_iters = 400;
  /// Relative dual residual accepted as converged.
  double dual_tol = 1e-9;
  /// Minimum slack of a repaired start relative to the interior potential's slack.
  double interior_margin = 1e-3;
  /// Return H^{-1} M_C target directly when it satisfies every constraint.
  bool try_unconstrained = true;
  bool keep_trace = false;
};

struct NewtonTraceEntry {
  int iteration = 0;
  double sigma = 0.0;
  double objective = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  double min_slack = 0.0;
  double min_lambda = 0.0;
  double alpha_primal = 0.0;
  double alpha_dual = 0.0;
  bool accepted = true;
};

struct BarrierReport {
  int newton_iterations = 0;
  int sigma_levels = 0;
  int rejected_steps = 0;
  double final_sigma = 0.0;
  double objective_init = 0.0;
  double objective_final = 0.0;
  /// max_k s_k lambda_k at the returned point.
  double max_complementarity = 0.0;
  double min_slack = 0.0;
  bool unconstrained = false;
  bool start_repaired = false;
  /// The feasible set had no interior and the caller fell back to the backup potential.
  bool degenerate = false;
  std::vector<NewtonTraceEntry> trace;
};

struct BarrierResult {
  Vector udot;    // full length, fixed potentials zero
  Vector lambda;  // multipliers of A udot <= b
  BarrierReport report;
};

/// Primal-dual barrier Newton method for the potential QP. Each step solves the
/// reduced system (H + L diag(lambda/s) L) du = -grad f + sigma L (1/s_lo - 1/s_hi)
/// with a sparse Cholesky factorization. A start that is not strictly feasible is
/// first blended towards interior_potential(qp).
/// Throws SolverBreakdown if the Newton matrix cannot be factorized and
/// NotConverged when max_newton_iters is exhausted.
BarrierResult barrier_newton_solve(const QPInstance& qp, std::span<const double> init,
                                   const BarrierConfig& cfg = {});

/// Newton trace as CSV with header
/// iteration,sigma,objective,dual_residual,complementarity,min_slack,min_lambda,alpha_primal,alpha_dual,accepted
void write_newton_trace(const std::vector<NewtonTraceEntry>& trace, const std::string& path);

}  // namespace fluxpot
