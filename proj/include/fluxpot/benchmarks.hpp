#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluxpot/schemes.hpp"

namespace fluxpot {

enum class Problem { SolidBodyRotation, SteadyCircularAdvection, AnisotropicDiffusion };

const char* to_string(Problem p);
/// Accepts sbr, steady and diffusion.
Problem parse_problem(const std::string& name);

namespace problems {
/// Hump, cone and slotted cylinder on a zero background.
double rotation_initial(Point p);
/// v = (0.5 - y, x - 0.5).
VelocityField rotation_velocity();
/// Radial ring profile; also the inflow data of the steady test.
double circular_exact(Point p);
/// v = (y, -x).
VelocityField circular_velocity();
/// R(-pi/6) diag(100, 1) R(pi/6).
DiffusionTensor anisotropic_tensor();
/// -1 on the outer boundary, +1 on the boundary of the hole.
double anisotropic_dirichlet(Point p);
}  // namespace problems

struct ProblemSpec {
  Problem problem = Problem::SolidBodyRotation;
  std::size_t n = 64;
  SchemeConfig cfg;
  double mu = 0.01;
  /// Resolution of the fine-grid reference of the diffusion problem.
  std::size_t reference_n = 576;
  /// Pseudo-times at which the OB-PP objective values are recorded.
  std::vector<double> record_objective_at;
  std::string field_path;
  std::string history_path;
  std::string trace_path;
};

/// Settings of the published experiments for `problem` solved by `scheme` on an n x n mesh.
ProblemSpec default_spec(Problem problem, Scheme scheme, std::size_t n);

struct ObjectiveRecord {
  double time = 0.0;
  double f_init = 0.0;
  double f_final = 0.0;
};

struct RunReport {
  Problem problem = Problem::SolidBodyRotation;
  Scheme scheme = Scheme::GalerkinUnlimited;
  std::size_t n = 0;
  double dt = 0.0;
  int steps = 0;
  double time = 0.0;
  /// Range attained over every step of the run.
  double u_min = 0.0;
  double u_max = 0.0;
  /// Physical bounds of the problem.
  double bound_lo = 0.0;
  double bound_hi = 0.0;
  bool bounds_ok = true;
  /// Worst per-step |mass change - boundary contribution| / sum m_i |u_i|.
  double conservation_drift = 0.0;
  /// Worst per-step |sum_i g*_i| / sum_i |g*_i|.
  double correction_imbalance = 0.0;
  std::optional<double> l1_error;
  std::optional<double> l2_error;
  std::string reference;
  double final_residual = 0.0;
  bool converged = false;
  double wall_time = 0.0;
  long newton_iterations = 0;
  int max_newton_iterations = 0;
  long rejected_steps = 0;
  long repaired_starts = 0;
  long degenerate_steps = 0;
  long unconstrained_steps = 0;
  long cfl_warnings = 0;
  std::vector<ObjectiveRecord> objectives;
  Vector u;
};

/// Runs one benchmark end to end and writes the files named in the spec.
RunReport run_benchmark(const ProblemSpec& spec);

/// Builds the mesh of the problem (punched square for the diffusion test).
Mesh benchmark_mesh(Problem problem, std::size_t n);
/// Initial state of the problem on `mesh`.
Vector initial_state(Problem problem, const Mesh& mesh);

/// Value of the bilinear field u at p (p must lie in a cell of the mesh).
double evaluate(const Mesh& mesh, std::span<const double> u, Point p);

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// Integrals of |u_h - ref| and |u_h - ref|^2 (square-rooted) with 3x3 Gauss points per cell.
ErrorNorms error_norms(const Mesh& mesh, std::span<const double> u_h, const ScalarFn& exact);
/// Same against a field on a mesh whose resolution is a multiple of mesh.n(),
/// integrating over the cells of the finer mesh.
ErrorNorms error_norms(const Mesh& mesh, std::span<const double> u_h, const Mesh& fine,
                       std::span<const double> u_fine);

/// Steady Galerkin solution of the diffusion problem at resolution n.
Vector diffusion_reference(std::size_t n);

struct ConvergenceRow {
  std::size_t inv_h = 0;
  double error = 0.0;
  std::optional<double> rate;
};

/// p = log2(e_coarse / e_fine) between consecutive rows.
std::vector<ConvergenceRow> convergence_table(const std::vector<std::size_t>& resolutions,
                                              const std::vector<double>& errors);
/// Runs the problem at every resolution and tabulates the L1 errors.
std::vector<ConvergenceRow> convergence_table(Problem problem, const std::vector<std::size_t>& resolutions,
                                              Scheme scheme);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);

}  // namespace fluxpot
