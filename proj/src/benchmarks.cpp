#include "fluxpot/benchmarks.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>

#include "fluxpot/error.hpp"
#include "fluxpot/io.hpp"

namespace fluxpot {

const char* to_string(Problem p) {
  switch (p) {
    case Problem::SolidBodyRotation: return "sbr";
    case Problem::SteadyCircularAdvection: return "steady";
    case Problem::AnisotropicDiffusion: return "diffusion";
  }
  return "?";
}

Problem parse_problem(const std::string& name) {
  for (Problem p : {Problem::SolidBodyRotation, Problem::SteadyCircularAdvection, Problem::AnisotropicDiffusion})
    if (name == to_string(p)) return p;
  throw ContractViolation("unknown problem: " + name);
}

namespace problems {

double rotation_initial(Point p) {
  const double r_hump = std::hypot(p.x - 0.25, p.y - 0.5);
  if (r_hump <= 0.15) return 0.25 + 0.25 * std::cos(std::numbers::pi * r_hump / 0.15);
  const double r_cone = std::hypot(p.x - 0.5, p.y - 0.25);
  if (r_cone <= 0.15) return 1.0 - r_cone / 0.15;
  const double r_cyl = std::hypot(p.x - 0.5, p.y - 0.75);
  if (r_cyl <= 0.15 && (std::abs(p.x - 0.5) >= 0.025 || p.y >= 0.85)) return 1.0;
  return 0.0;
}

VelocityField rotation_velocity() {
  return {[](Point p) { return Point{0.5 - p.y, p.x - 0.5}; }};
}

double circular_exact(Point p) {
  const double r = std::hypot(p.x, p.y);
  if (r >= 0.15 && r <= 0.45) return 1.0;
  if (r >= 0.55 && r <= 0.85) {
    const double c = std::cos(10.0 * std::numbers::pi * (r - 0.7) / 3.0);
    return c * c;
  }
  return 0.0;
}

VelocityField circular_velocity() {
  return {[](Point p) { return Point{p.y, -p.x}; }};
}

DiffusionTensor anisotropic_tensor() { return DiffusionTensor::rotated(100.0, 1.0, std::numbers::pi / 6.0); }

double anisotropic_dirichlet(Point p) {
  const double eps = 1e-12;
  const bool outer = p.x < eps || p.y < eps || p.x > 1.0 - eps || p.y > 1.0 - eps;
  return outer ? -1.0 : 1.0;
}

}  // namespace problems

ProblemSpec default_spec(Problem problem, Scheme scheme, std::size_t n) {
  ProblemSpec spec;
  spec.problem = problem;
  spec.n = n;
  spec.cfg.scheme = scheme;
  const bool obpp = scheme == Scheme::ObppFullyDiscrete || scheme == Scheme::ObppSemiDiscrete;
  spec.cfg.bounds.mode = obpp ? BoundsMode::GlobalBox : BoundsMode::LocalStencil;
  spec.cfg.bounds.box = {0.0, 1.0};
  switch (problem) {
    case Problem::SolidBodyRotation:
      spec.cfg.dt = 1e-3;
      spec.cfg.t_final = 2.0 * std::numbers::pi;
      break;
    case Problem::SteadyCircularAdvection:
      spec.cfg.dt = 1e-3;
      spec.cfg.t_final = 9.5;
      spec.cfg.steady_residual_tol = 1e-12;
      break;
    case Problem::AnisotropicDiffusion:
      spec.cfg.dt = 1e-6;
      spec.cfg.t_final = 2e-2;
      spec.cfg.steady_residual_tol = 0.0;
      spec.cfg.bounds.mode = BoundsMode::GlobalBox;
      spec.cfg.bounds.box = {-1.0, 1.0};
      break;
  }
  return spec;
}

Mesh benchmark_mesh(Problem problem, std::size_t n) {
  if (problem == Problem::AnisotropicDiffusion) {
    if (n % 9 != 0) throw ContractViolation("diffusion problem needs n divisible by 9");
    return build_punched_square(n);
  }
  return build_unit_square(n);
}

Vector initial_state(Problem problem, const Mesh& mesh) {
  switch (problem) {
    case Problem::SolidBodyRotation:
      return interpolate(mesh, problems::rotation_initial);
    case Problem::SteadyCircularAdvection:
      return Vector(mesh.num_nodes(), 0.0);
    case Problem::AnisotropicDiffusion: {
      Vector u(mesh.num_nodes(), 0.0);
      const auto bnd = mesh.boundary_nodes();
      for (std::size_t i = 0; i < u.size(); ++i)
        if (bnd[i]) u[i] = problems::anisotropic_dirichlet(mesh.nodes()[i]);
      return u;
    }
  }
  return {};
}

namespace {

constexpr std::array<double, 3> kGauss = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
constexpr std::array<double, 3> kWeights = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double bilinear(const Mesh& mesh, std::size_t cell, std::span<const double> u, double xi, double eta) {
  const auto& c = mesh.cells()[cell];
  return u[c[0]] * (1 - xi) * (1 - eta) + u[c[1]] * xi * (1 - eta) + u[c[2]] * xi * eta +
         u[c[3]] * (1 - xi) * eta;
}

template <class Ref>
ErrorNorms integrate_error(const Mesh& quad_mesh, const Ref& diff_at) {
  ErrorNorms e;
  const double h = quad_mesh.h();
  for (std::size_t c = 0; c < quad_mesh.num_cells(); ++c) {
    const Point o = quad_mesh.nodes()[quad_mesh.cells()[c][0]];
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double w = kWeights[a] * kWeights[b] * h * h;
        const double d = diff_at(c, kGauss[a], kGauss[b], Point{o.x + h * kGauss[a], o.y + h * kGauss[b]});
        e.l1 += w * std::abs(d);
        e.l2 += w * d * d;
      }
  }
  e.l2 = std::sqrt(e.l2);
  return e;
}

}  // namespace

double evaluate(const Mesh& mesh, std::span<const double> u, Point p) {
  const std::size_t c = mesh.locate(p);
  if (c == npos) throw ContractViolation("evaluate: point outside the mesh");
  const Point o = mesh.nodes()[mesh.cells()[c][0]];
  return bilinear(mesh, c, u, (p.x - o.x) / mesh.h(), (p.y - o.y) / mesh.h());
}

ErrorNorms error_norms(const Mesh& mesh, std::span<const double> u_h, const ScalarFn& exact) {
  if (u_h.size() != mesh.num_nodes()) throw ContractViolation("error_norms: size mismatch");
  return integrate_error(mesh, [&](std::size_t c, double xi, double eta, Point x) {
    return bilinear(mesh, c, u_h, xi, eta) - exact(x);
  });
}

ErrorNorms error_norms(const Mesh& mesh, std::span<const double> u_h, const Mesh& fine,
                       std::span<const double> u_fine) {
  if (u_h.size() != mesh.num_nodes() || u_fine.size() != fine.num_nodes())
    throw ContractViolation("error_norms: size mismatch");
  if (fine.n() % mesh.n() != 0)
    throw ContractViolation("error_norms: reference resolution is not a refinement of the mesh");
  return integrate_error(fine, [&](std::size_t c, double xi, double eta, Point x) {
    return evaluate(mesh, u_h, x) - bilinear(fine, c, u_fine, xi, eta);
  });
}

Vector diffusion_reference(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, Vector> cache;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const DiffusionSystem sys = make_diffusion_system(build_punched_square(n), problems::anisotropic_tensor(),
                                                    problems::anisotropic_dirichlet, 0.0, false);
  return cache[n] = steady_galerkin_solve(sys);
}

namespace {

class ReportBuilder {
 public:
  ReportBuilder(RunReport& rep, const ProblemSpec& spec) : rep_(rep), spec_(spec) {}

  void start(std::span<const double> u, std::span<const double> ml) {
    rep_.u_min = *std::min_element(u.begin(), u.end());
    rep_.u_max = *std::max_element(u.begin(), u.end());
    ml_ = ml;
  }

  void record(int step, double time, std::span<const double> u_old, const StepDiagnostics& d,
              double residual) {
    rep_.steps = step;
    rep_.time = time;
    rep_.u_min = std::min(rep_.u_min, d.u_min);
    rep_.u_max = std::max(rep_.u_max, d.u_max);
    double scale = 0.0;
    for (std::size_t i = 0; i < u_old.size(); ++i) scale += ml_[i] * std::abs(u_old[i]);
    if (scale > 0.0)
      rep_.conservation_drift =
          std::max(rep_.conservation_drift, std::abs(d.mass_change - d.expected_mass_change) / scale);
    if (d.correction_abs > 0.0)
      rep_.correction_imbalance =
          std::max(rep_.correction_imbalance, std::abs(d.correction_sum) / d.correction_abs);
    if (d.cfl > 1.0 + 1e-12 || !d.backup_cfl_ok) ++rep_.cfl_warnings;
    rep_.final_residual = residual;
    if (d.barrier) {
      const auto& b = *d.barrier;
      rep_.newton_iterations += b.newton_iterations;
      rep_.max_newton_iterations = std::max(rep_.max_newton_iterations, b.newton_iterations);
      rep_.rejected_steps += b.rejected_steps;
      rep_.repaired_starts += b.start_repaired ? 1 : 0;
      rep_.degenerate_steps += b.degenerate ? 1 : 0;
      rep_.unconstrained_steps += b.unconstrained ? 1 : 0;
      while (next_record_ < spec_.record_objective_at.size() &&
             time >= spec_.record_objective_at[next_record_] - 0.5 * spec_.cfg.dt) {
        rep_.objectives.push_back({time, b.objective_init, b.objective_final});
        ++next_record_;
      }
      if (!spec_.trace_path.empty()) last_trace_ = b.trace;
    }
    if (!spec_.history_path.empty()) history_.push_back({step, time, residual, d.u_min, d.u_max});
  }

  void finish() {
    rep_.bounds_ok = rep_.u_min >= rep_.bound_lo - 1e-8 && rep_.u_max <= rep_.bound_hi + 1e-8;
    if (!spec_.history_path.empty()) write_history(history_, spec_.history_path);
    if (!spec_.trace_path.empty()) write_newton_trace(last_trace_, spec_.trace_path);
  }

 private:
  RunReport& rep_;
  const ProblemSpec& spec_;
  std::span<const double> ml_;
  std::size_t next_record_ = 0;
  std::vector<HistoryEntry> history_;
  std::vector<NewtonTraceEntry> last_trace_;
};

bool is_obpp(Scheme s) { return s == Scheme::ObppFullyDiscrete || s == Scheme::ObppSemiDiscrete; }

bool solver_error(const std::exception& e) {
  return dynamic_cast<const SolverBreakdown*>(&e) || dynamic_cast<const NotConverged*>(&e) ||
         dynamic_cast<const SingularMatrix*>(&e) || dynamic_cast<const InfeasibleBackup*>(&e) ||
         dynamic_cast<const Diverged*>(&e);
}

}  // namespace

RunReport run_benchmark(const ProblemSpec& spec) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.problem = spec.problem;
  rep.scheme = spec.cfg.scheme;
  rep.n = spec.n;
  rep.dt = spec.cfg.dt;
  SchemeConfig cfg = spec.cfg;
  cfg.barrier.keep_trace = !spec.trace_path.empty();
  const bool obpp = is_obpp(cfg.scheme);
  const Mesh mesh = benchmark_mesh(spec.problem, spec.n);
  Vector u = initial_state(spec.problem, mesh);
  ReportBuilder builder(rep, spec);
  int step = 0;

  try {
    switch (spec.problem) {
      case Problem::SolidBodyRotation: {
        rep.bound_lo = 0.0;
        rep.bound_hi = 1.0;
        const AdvectionSystem sys = make_advection_system(mesh, problems::rotation_velocity(),
                                                          [](Point) { return 0.0; }, spec.mu, obpp);
        const Vector u0 = u;
        builder.start(u, sys.ml);
        double t = 0.0;
        while (cfg.t_final - t > 1e-12) {
          SchemeConfig c = cfg;
          c.dt = std::min(cfg.dt, cfg.t_final - t);
          ++step;
          StepResult r = ttg4a_step(u, sys, c);
          double res = 0.0;
          for (std::size_t i = 0; i < u.size(); ++i) res += sys.ml[i] * std::pow((r.u[i] - u[i]) / c.dt, 2);
          t += c.dt;
          builder.record(step, t, u, r.diag, std::sqrt(res));
          u = std::move(r.u);
        }
        const ErrorNorms e = error_norms(mesh, u, mesh, u0);
        rep.l1_error = e.l1;
        rep.l2_error = e.l2;
        rep.reference = "initial interpolant";
        break;
      }
      case Problem::SteadyCircularAdvection: {
        rep.bound_lo = 0.0;
        rep.bound_hi = 1.0;
        const AdvectionSystem sys = make_advection_system(mesh, problems::circular_velocity(),
                                                          problems::circular_exact, spec.mu, obpp);
        builder.start(u, sys.ml);
        const Vector* prev = &u;
        Vector keep;
        const MarchResult m = march_to_steady(&sys, u, cfg, [&](int s, double t, const PseudoStepResult& r) {
          step = s;
          builder.record(s, t, *prev, r.diag, r.residual_norm);
          keep = r.u;
          prev = &keep;
        });
        u = m.u;
        rep.converged = m.converged;
        const ErrorNorms e = error_norms(mesh, u, problems::circular_exact);
        rep.l1_error = e.l1;
        rep.l2_error = e.l2;
        rep.reference = "exact solution";
        break;
      }
      case Problem::AnisotropicDiffusion: {
        rep.bound_lo = -1.0;
        rep.bound_hi = 1.0;
        const DiffusionSystem sys = make_diffusion_system(mesh, problems::anisotropic_tensor(),
                                                          problems::anisotropic_dirichlet, spec.mu, obpp);
        builder.start(u, sys.ml);
        if (cfg.scheme == Scheme::GalerkinUnlimited && cfg.t_final == 0.0) {
          u = steady_galerkin_solve(sys);
          rep.u_min = *std::min_element(u.begin(), u.end());
          rep.u_max = *std::max_element(u.begin(), u.end());
          rep.converged = true;
        } else {
          const Vector* prev = &u;
          Vector keep;
          const MarchResult m = march_to_steady(&sys, u, cfg, [&](int s, double t, const PseudoStepResult& r) {
            step = s;
            builder.record(s, t, *prev, r.diag, r.residual_norm);
            keep = r.u;
            prev = &keep;
          });
          u = m.u;
          rep.converged = m.converged;
        }
        const Mesh fine = build_punched_square(spec.reference_n);
        const ErrorNorms e = error_norms(mesh, u, fine, diffusion_reference(spec.reference_n));
        rep.l1_error = e.l1;
        rep.l2_error = e.l2;
        rep.reference = "steady Galerkin solution, n=" + std::to_string(spec.reference_n);
        break;
      }
    }
  } catch (const StepFailure&) {
    throw;
  } catch (const ContractViolation&) {
    throw;
  } catch (const Error& e) {
    throw StepFailure(std::string(e.what()) + " (step " + std::to_string(step + 1) + ")", step + 1,
                      solver_error(e));
  }

  builder.finish();
  rep.u = u;
  if (!spec.field_path.empty()) write_field(mesh, u, spec.field_path, format_from_path(spec.field_path));
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::vector<ConvergenceRow> convergence_table(const std::vector<std::size_t>& resolutions,
                                              const std::vector<double>& errors) {
  if (resolutions.size() != errors.size() || resolutions.size() < 2)
    throw ContractViolation("convergence_table: need at least two matching resolutions and errors");
  std::vector<ConvergenceRow> rows;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    ConvergenceRow row{resolutions[k], errors[k], std::nullopt};
    if (k > 0) row.rate = std::log2(errors[k - 1] / errors[k]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<ConvergenceRow> convergence_table(Problem problem, const std::vector<std::size_t>& resolutions,
                                              Scheme scheme) {
  std::vector<double> errors;
  for (std::size_t n : resolutions) {
    const RunReport r = run_benchmark(default_spec(problem, scheme, n));
    if (!r.l1_error) throw ContractViolation("convergence_table: run produced no error norm");
    errors.push_back(*r.l1_error);
  }
  return convergence_table(resolutions, errors);
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_convergence_csv: cannot open " + path);
  os.precision(10);
  os << "inv_h,error,rate\n";
  for (const auto& r : rows) {
    os << r.inv_h << ',' << r.error << ',';
    if (r.rate) os << *r.rate;
    os << '\n';
  }
}

}  // namespace fluxpot
