// Command-line driver for the benchmark problems.
//
//   fluxpot --problem sbr --scheme obpp --n 64 --dt 2e-3 --out u.vtk
//
// Prints one JSON object per run on stdout. Exit status: 0 success,
// 2 bound violation by a bound-preserving scheme, 3 solver failure.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "fluxpot/benchmarks.hpp"
#include "fluxpot/error.hpp"

using namespace fluxpot;
using nlohmann::json;

namespace {

BoundsSpec parse_bounds(const std::string& s) {
  if (s == "local") return {BoundsMode::LocalStencil, {}};
  if (s.starts_with("global:")) {
    const auto rest = s.substr(7);
    const auto colon = rest.find(':');
    if (colon != std::string::npos)
      return {BoundsMode::GlobalBox, {std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1))}};
  }
  throw ContractViolation("--bounds expects local or global:lo:hi");
}

json to_json(const RunReport& r) {
  json j = {{"problem", to_string(r.problem)},
            {"scheme", to_string(r.scheme)},
            {"n", r.n},
            {"dt", r.dt},
            {"steps", r.steps},
            {"time", r.time},
            {"u_min", r.u_min},
            {"u_max", r.u_max},
            {"bounds_ok", r.bounds_ok},
            {"conservation_drift", r.conservation_drift},
            {"correction_imbalance", r.correction_imbalance},
            {"final_residual", r.final_residual},
            {"converged", r.converged},
            {"wall_time", r.wall_time},
            {"newton_iterations", r.newton_iterations},
            {"max_newton_iterations", r.max_newton_iterations},
            {"rejected_steps", r.rejected_steps},
            {"repaired_starts", r.repaired_starts},
            {"degenerate_steps", r.degenerate_steps},
            {"unconstrained_steps", r.unconstrained_steps},
            {"cfl_warnings", r.cfl_warnings}};
  if (r.l1_error) j["l1_error"] = *r.l1_error;
  if (r.l2_error) j["l2_error"] = *r.l2_error;
  if (!r.reference.empty()) j["reference"] = r.reference;
  for (const auto& o : r.objectives)
    j["objectives"].push_back({{"time", o.time}, {"f_init", o.f_init}, {"f_final", o.f_final}});
  return j;
}

void export_matrices(Problem problem, std::size_t n, const std::string& dir) {
  const Mesh mesh = benchmark_mesh(problem, n);
  write_matrix_market(assemble(mesh, op::ConsistentMass{}), dir + "/mass.mtx");
  if (problem == Problem::AnisotropicDiffusion) {
    write_matrix_market(assemble(mesh, op::AnisotropicStiffness{problems::anisotropic_tensor()}),
                        dir + "/stiffness.mtx");
    return;
  }
  const VelocityField v = problem == Problem::SolidBodyRotation ? problems::rotation_velocity()
                                                               : problems::circular_velocity();
  const SparseMatrix k = assemble(mesh, op::Advection{v});
  write_matrix_market(k, dir + "/advection.mtx");
  write_matrix_market(assemble(mesh, op::StreamlineDiffusion{v}), dir + "/streamline.mtx");
  write_matrix_market(artificial_diffusion(k), dir + "/artificial_diffusion.mtx");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flux-potential limiting benchmarks"};
  std::string problem_name = "sbr", scheme_name = "obpp", bounds, out, history, trace, table, mtx_dir;
  std::size_t n = 64, reference_n = 576;
  double dt = 0.0, t_final = -1.0, mu = 0.01, sigma_min = 0.0;
  int dc_sweeps = 0, max_newton = 0;
  bool exact_mass = false;
  std::vector<double> record;
  std::vector<std::size_t> convergence;
  app.add_option("--problem", problem_name, "sbr, steady or diffusion")->capture_default_str();
  app.add_option("--scheme", scheme_name, "galerkin, fct, mcl, obpp or obpp-semi")->capture_default_str();
  app.add_option("--n", n, "cells per unit length")->capture_default_str();
  app.add_option("--dt", dt, "time step (default per problem)");
  app.add_option("--t-final", t_final, "final (pseudo-)time; 0 with galerkin on diffusion solves directly");
  app.add_option("--mu", mu, "objective stabilisation weight")->capture_default_str();
  app.add_option("--bounds", bounds, "local or global:lo:hi");
  app.add_option("--sigma-min", sigma_min, "final barrier parameter");
  app.add_option("--max-newton", max_newton, "Newton iteration limit of each optimization");
  app.add_option("--dc-sweeps", dc_sweeps, "deferred correction iterates for the first stage");
  app.add_flag("--exact-mass", exact_mass, "solve the first stage with the factorized mass matrix");
  app.add_option("--reference-n", reference_n, "fine-grid reference resolution (diffusion)")->capture_default_str();
  app.add_option("--record", record, "pseudo-times at which objective values are reported")->delimiter(',');
  app.add_option("--out", out, "field output, .vtk or .csv");
  app.add_option("--history", history, "residual history CSV");
  app.add_option("--trace", trace, "Newton trace CSV of the last optimization");
  app.add_option("--convergence", convergence, "resolutions for an L1 convergence table")->delimiter(',');
  app.add_option("--table", table, "CSV path of the convergence table");
  app.add_option("--export-matrices", mtx_dir, "write MatrixMarket files of the assembled operators");
  CLI11_PARSE(app, argc, argv);

  try {
    const Problem problem = parse_problem(problem_name);
    const Scheme scheme = parse_scheme(scheme_name);
    if (!mtx_dir.empty()) {
      export_matrices(problem, n, mtx_dir);
      return 0;
    }
    if (!convergence.empty()) {
      const auto rows = convergence_table(problem, convergence, scheme);
      for (const auto& r : rows) {
        json j = {{"inv_h", r.inv_h}, {"l1_error", r.error}};
        if (r.rate) j["rate"] = *r.rate;
        std::cout << j.dump() << '\n';
      }
      if (!table.empty()) write_convergence_csv(rows, table);
      return 0;
    }

    ProblemSpec spec = default_spec(problem, scheme, n);
    spec.mu = mu;
    spec.reference_n = reference_n;
    if (dt > 0.0) spec.cfg.dt = dt;
    if (t_final >= 0.0) spec.cfg.t_final = t_final;
    if (!bounds.empty()) spec.cfg.bounds = parse_bounds(bounds);
    if (sigma_min > 0.0) spec.cfg.barrier.sigma_min = sigma_min;
    if (dc_sweeps > 0) spec.cfg.deferred_correction_sweeps = dc_sweeps;
    if (max_newton > 0) spec.cfg.barrier.max_newton_iters = max_newton;
    spec.cfg.exact_mass_solve = exact_mass;
    spec.record_objective_at = record;
    spec.field_path = out;
    spec.history_path = history;
    spec.trace_path = trace;

    const RunReport rep = run_benchmark(spec);
    std::cout << to_json(rep).dump() << std::endl;
    if (rep.cfl_warnings > 0)
      std::cerr << "warning: CFL condition of the bound-preserving update violated in " << rep.cfl_warnings
                << " steps\n";
    if (scheme != Scheme::GalerkinUnlimited && !rep.bounds_ok) return 2;
    return 0;
  } catch (const StepFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.solver() ? 3 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
