#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fluxpot/flux.hpp"
#include "fluxpot/limiters.hpp"
#include "fluxpot/linalg.hpp"
#include "fluxpot/sparse.hpp"

namespace fluxpot {

enum class QPVariant { FullyDiscrete, SemiDiscrete };

/// Symbolic product H + L diag(w) L used by the reduced Newton system. Each
/// term adds coeff * w[node] to one entry of `pattern`.
struct SchurPlan {
  struct Term {
    std::size_t slot;
    std::size_t node;
    double coeff;
  };
  PatternPtr pattern;
  std::vector<std::size_t> hessian_slot;
  std::vector<Term> terms;
};

/// Everything about a potential-control QP that depends only on the mesh:
/// M_C, M_L, the graph Laplacian M_L - M_C, the stabilisation weight mu and
/// the set of free potentials. Potentials of `fixed` nodes are held at zero and
/// their constraint rows dropped.
class QPStructure {
 public:
  QPStructure(SparseMatrix consistent_mass, double mu, std::vector<bool> fixed = {});

  const SparseMatrix& consistent_mass() const { return mc_; }
  const Vector& lumped_mass() const { return ml_; }
  /// M_L - M_C on the mass pattern.
  const SparseMatrix& laplacian() const { return laplacian_; }
  double mu() const { return mu_; }

  std::size_t num_nodes() const { return ml_.size(); }
  std::size_t num_free() const { return free_.size(); }
  bool has_fixed() const { return free_.size() != ml_.size(); }
  std::span<const std::size_t> free_nodes() const { return free_; }
  const std::vector<bool>& fixed_mask() const { return fixed_; }

  /// Laplacian and Hessian M_C + mu (M_L - M_C) restricted to free nodes.
  const SparseMatrix& reduced_laplacian() const { return reduced_laplacian_; }
  const SparseMatrix& reduced_hessian() const { return reduced_hessian_; }
  const SchurPlan& schur_plan() const { return plan_; }

  /// Solves L_ff x = rhs_f with the Laplacian restricted to free nodes. Without
  /// fixed nodes this is the zero-mean Neumann solve.
  Vector solve_laplacian(std::span<const double> reduced_rhs) const;
  /// Solves H_ff x = rhs_f.
  Vector solve_hessian(std::span<const double> reduced_rhs) const;

  Vector expand(std::span<const double> reduced) const;
  Vector restrict(std::span<const double> full) const;

 private:
  SparseMatrix mc_;
  Vector ml_;
  SparseMatrix laplacian_;
  double mu_;
  std::vector<bool> fixed_;
  std::vector<std::size_t> free_;
  SparseMatrix reduced_laplacian_;
  SparseMatrix reduced_hessian_;
  SchurPlan plan_;
  std::unique_ptr<NeumannSolver> neumann_;
  std::unique_ptr<LuFactorization> dirichlet_;
  std::unique_ptr<LuFactorization> hessian_lu_;
};

/// Time-step data of the fully discrete constraints, or the rate coefficients
/// c_i of the semi-discrete ones.
struct ConstraintScaling {
  double dt = 0.0;
  Vector c;

  static ConstraintScaling fully_discrete(double dt) { return {dt, {}}; }
  static ConstraintScaling semi_discrete(Vector c) { return {0.0, std::move(c)}; }
};

/// minimize f_mu(udot) = 1/2 (udot - target)^T M_C (udot - target) + mu/2 udot^T (M_L - M_C) udot
/// subject to lower_i <= ((M_L - M_C) udot)_i <= upper_i for every free node i.
/// In matrix form A udot <= b with A = [L; -L] and b = [upper; -lower].
struct QPInstance {
  std::shared_ptr<const QPStructure> structure;
  QPVariant variant = QPVariant::FullyDiscrete;
  Vector target;  // full length
  Vector lower;   // free nodes
  Vector upper;   // free nodes

  double mu() const { return structure->mu(); }
  std::size_t num_free() const { return structure->num_free(); }
  SparseMatrix constraint_matrix() const;
  Vector constraint_rhs() const;
  /// b - A udot for a full-length udot.
  Vector slack(std::span<const double> udot) const;
  /// Largest constraint violation max(0, -(b - A udot)).
  double max_violation(std::span<const double> udot) const;
  /// max |b|, the scale of constraint tolerances.
  double scale() const;
};

/// FullyDiscrete: upper_i = m_i/dt (u_max_i - u_i) - r_i, lower_i = m_i/dt (u_min_i - u_i) - r_i.
/// SemiDiscrete:  upper_i = c_i (u_max_i - u_i) - r_i,    lower_i = c_i (u_min_i - u_i) - r_i.
QPInstance build_qp(QPVariant variant, std::shared_ptr<const QPStructure> structure,
                    std::span<const double> u, std::span<const double> r, const NodalBounds& bounds,
                    const ConstraintScaling& scaling, std::span<const double> target);

struct ObjectiveEval {
  double value = 0.0;
  Vector gradient;
};

/// f_mu and its gradient M_C (udot - target) + mu (M_L - M_C) udot (full length).
ObjectiveEval objective(const QPInstance& qp, std::span<const double> udot);
/// M_C + mu (M_L - M_C).
SparseMatrix objective_hessian(const QPInstance& qp);

/// Nodal state the potential udot produces: u_tilde_i + dt/m_i ((M_L - M_C) udot)_i
/// for the fully discrete problem, where u_tilde = u + dt r / m.
Vector reconstruct_state(const QPStructure& s, std::span<const double> u, std::span<const double> r,
                         double dt, std::span<const double> udot);

struct BackupResult {
  Vector r_backup;
  double rho = 0.0;
  Vector omega;
  double c_backup = 0.0;
  Vector udot_backup;
  /// dt c^B <= min m_i (fully discrete) or c^B <= min c_i (semi-discrete).
  bool cfl_satisfied = true;
};

/// Residual distribution r^B_i = omega_i rho / sum omega with rho = sum r_i and
/// omega_i = u_max_i - u_i (rho > 0), u_min_i - u_i (rho < 0), 0 (rho = 0); then
/// (M_L - M_C) udot^B = r^B - r. Throws InfeasibleBackup when rho != 0 but sum omega = 0.
BackupResult backup_potential(const QPInstance& qp, std::span<const double> r,
                              std::span<const double> u, const NodalBounds& bounds,
                              const ConstraintScaling& scaling);

/// Solves (M_L - M_C) udot = D u + sum_j f_ij subject to sum(udot) = 0 (or with
/// fixed potentials held at zero).
Vector warm_start(const QPStructure& structure, const SparseMatrix& diffusion,
                  std::span<const double> u, const FluxSet& fluxes);

/// A potential strictly inside the feasible set: rates lower + kappa (upper - lower),
/// kappa chosen so the rates sum to zero when no potential is fixed.
Vector interior_potential(const QPInstance& qp);

/// Blends `candidate` towards `interior` as little as possible so that every
/// slack is at least `margin` times the interior slack. Returns the candidate
/// unchanged when it already satisfies this.
Vector strictly_feasible_start(const QPInstance& qp, std::span<const double> candidate,
                               std::span<const double> interior, double margin = 1e-3);

/// g*_ij = m_ij (udot_i - udot_j).
FluxSet potentials_to_fluxes(const SparseMatrix& consistent_mass, std::span<const double> udot);

}  // namespace fluxpot
