#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fluxpot/assembly.hpp"
#include "fluxpot/barrier.hpp"
#include "fluxpot/error.hpp"
#include "fluxpot/limiters.hpp"
#include "fluxpot/mesh.hpp"
#include "fluxpot/obpp.hpp"
#include "oracles.hpp"

using namespace fluxpot;

namespace {

// 1D linear finite element mass matrix on n equally spaced nodes of [0, 1].
SparseMatrix path_mass(std::size_t n) {
  const double h = 1.0 / static_cast<double>(n - 1);
  std::vector<Triplet> t;
  for (std::size_t e = 0; e + 1 < n; ++e) {
    t.push_back({e, e, h / 3.0});
    t.push_back({e + 1, e + 1, h / 3.0});
    t.push_back({e, e + 1, h / 6.0});
    t.push_back({e + 1, e, h / 6.0});
  }
  return SparseMatrix::from_triplets(n, n, t);
}

SparseMatrix two_node_mass() {
  return SparseMatrix::from_triplets(2, 2, {{0, 0, 0.75}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.75}});
}

Vector uniform(std::mt19937& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector x(n);
  for (double& v : x) v = u(rng);
  return x;
}

struct Instance {
  QPInstance qp;
  Vector u;
  Vector r;
  NodalBounds bounds;
  double dt;
};

// Random fully discrete instance whose feasible set has an interior.
std::optional<Instance> random_instance(std::mt19937& rng, std::shared_ptr<const QPStructure> s) {
  const std::size_t n = s->num_nodes();
  Vector u = uniform(rng, n, 0.0, 1.0), r = uniform(rng, n, -0.3, 0.3), target = uniform(rng, n, -2.0, 2.0);
  for (std::size_t i = 0; i < n; ++i) r[i] *= s->lumped_mass()[i];
  const double dt = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
  NodalBounds b = local_bounds(n, GlobalBox{0.0, 1.0});
  QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, b, ConstraintScaling::fully_discrete(dt), target);
  if (!(sum(qp.lower) < 0.0 && sum(qp.upper) > 0.0)) return std::nullopt;
  return Instance{std::move(qp), std::move(u), std::move(r), std::move(b), dt};
}

oracle::QPSolution oracle_solve(const QPInstance& qp) {
  // Over the free potentials only; fixed ones are zero.
  const auto& s = *qp.structure;
  const auto mc = s.consistent_mass().to_dense();
  const auto hfull = objective_hessian(qp).to_dense();
  const auto free = s.free_nodes();
  const std::size_t m = free.size();
  const Vector mt = oracle::matvec(mc, qp.target);
  oracle::Dense h = oracle::zeros(m, m);
  Vector c(m);
  for (std::size_t a = 0; a < m; ++a) {
    c[a] = -mt[free[a]];
    for (std::size_t b = 0; b < m; ++b) h[a][b] = hfull[free[a]][free[b]];
  }
  const auto a = qp.constraint_matrix().to_dense();
  const Vector b = qp.constraint_rhs();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i) pairs.push_back({i, i + m});
  auto sol = oracle::active_set_qp(h, c, a, b, pairs, 1e-9);
  sol.value += 0.5 * oracle::dot(qp.target, mt);
  return sol;
}

}  // namespace

TEST_CASE("structure of the two node system") {
  const auto s = std::make_shared<QPStructure>(two_node_mass(), 0.01);
  CHECK(s->lumped_mass() == Vector{1.0, 1.0});
  CHECK(s->laplacian()(0, 1) == doctest::Approx(-0.25));
  CHECK(s->num_free() == 2);
  CHECK_FALSE(s->has_fixed());
  CHECK_THROWS_AS(QPStructure(two_node_mass(), -0.1), ContractViolation);
}

TEST_CASE("two node constraint rows") {
  const auto s = std::make_shared<QPStructure>(two_node_mass(), 0.0);
  const Vector u{0.0, 1.0}, r{0.0, 0.0};
  const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, local_bounds(2, GlobalBox{0.0, 1.0}),
                                 ConstraintScaling::fully_discrete(1.0), Vector{0.0, 0.0});
  CHECK(qp.constraint_rhs() == Vector{1.0, 0.0, 0.0, 1.0});
  const auto a = qp.constraint_matrix().to_dense();
  const double sign[4] = {1.0, -1.0, -1.0, 1.0};
  for (int k = 0; k < 4; ++k) {
    CHECK(a[k][0] == doctest::Approx(0.25 * sign[k]));
    CHECK(a[k][1] == doctest::Approx(-0.25 * sign[k]));
  }
  CHECK(qp.max_violation(Vector{0.0, 0.0}) == 0.0);
  CHECK(qp.max_violation(Vector{1.0, 0.0}) == 0.0);
  CHECK(qp.max_violation(Vector{-1.0, 0.0}) == doctest::Approx(0.25));
}

TEST_CASE("zero state with zero residual admits the zero potential") {
  const auto s = std::make_shared<QPStructure>(assemble(build_unit_square(4), op::ConsistentMass{}), 0.01);
  const Vector z(s->num_nodes(), 0.0);
  const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, z, z, local_bounds(z.size(), GlobalBox{0.0, 1.0}),
                                 ConstraintScaling::fully_discrete(1e-3), z);
  for (double v : qp.slack(z)) CHECK(v >= 0.0);
}

TEST_CASE("semi-discrete constraint right-hand side") {
  const auto s = std::make_shared<QPStructure>(two_node_mass(), 0.0);
  const QPInstance qp =
      build_qp(QPVariant::SemiDiscrete, s, Vector{0.25, 0.5}, Vector{0.1, -0.1}, local_bounds(2, GlobalBox{0.0, 1.0}),
               ConstraintScaling::semi_discrete(Vector{2.0, 4.0}), Vector{0.0, 0.0});
  CHECK(qp.upper[0] == doctest::Approx(2.0 * 0.75 - 0.1));
  CHECK(qp.upper[1] == doctest::Approx(4.0 * 0.5 + 0.1));
  CHECK(qp.lower[0] == doctest::Approx(2.0 * -0.25 - 0.1));
  CHECK(qp.lower[1] == doctest::Approx(4.0 * -0.5 + 0.1));
}

TEST_CASE("objective values") {
  const auto s = std::make_shared<QPStructure>(assemble(build_unit_square(5), op::ConsistentMass{}), 0.0);
  const std::size_t n = s->num_nodes();
  std::mt19937 rng(1);
  const Vector t = uniform(rng, n, -1.0, 1.0);
  QPInstance qp{s, QPVariant::FullyDiscrete, t, Vector(n, -1.0), Vector(n, 1.0)};
  const ObjectiveEval at_target = objective(qp, t);
  CHECK(at_target.value == 0.0);
  CHECK(norm_inf(at_target.gradient) == 0.0);

  const auto s2 = std::make_shared<QPStructure>(assemble(build_unit_square(5), op::ConsistentMass{}), 0.01);
  QPInstance q2{s2, QPVariant::FullyDiscrete, Vector(n, 0.0), Vector(n, -1.0), Vector(n, 1.0)};
  const double c = 1.7;
  CHECK(objective(q2, Vector(n, c)).value == doctest::Approx(0.5 * c * c * 1.0).epsilon(1e-13));
}

TEST_CASE("property: objective gradient matches central differences") {
  std::mt19937 rng(5);
  const auto s = std::make_shared<QPStructure>(path_mass(5), 0.01);
  for (int trial = 0; trial < 20; ++trial) {
    const QPInstance qp{s, QPVariant::FullyDiscrete, uniform(rng, 5, -1.0, 1.0), Vector(5, -1.0), Vector(5, 1.0)};
    const Vector x = uniform(rng, 5, -2.0, 2.0);
    const Vector g = objective(qp, x).gradient;
    const Vector fd = oracle::fd_gradient([&](const Vector& y) { return objective(qp, y).value; }, x);
    CHECK(oracle::max_abs_diff(g, fd) <= 1e-6 * std::max(1.0, oracle::max_abs(g)));
  }
}

TEST_CASE("objective hessian is symmetric positive definite") {
  const auto s = std::make_shared<QPStructure>(path_mass(7), 0.01);
  const QPInstance qp{s, QPVariant::FullyDiscrete, Vector(7, 0.0), Vector(7, -1.0), Vector(7, 1.0)};
  const auto h = objective_hessian(qp).to_dense();
  // Cholesky by hand: positive pivots throughout.
  auto l = h;
  bool spd = true;
  for (std::size_t k = 0; k < 7; ++k) {
    for (std::size_t j = 0; j < k; ++j) l[k][k] -= l[k][j] * l[k][j];
    spd = spd && l[k][k] > 0.0;
    l[k][k] = std::sqrt(l[k][k]);
    for (std::size_t i = k + 1; i < 7; ++i) {
      for (std::size_t j = 0; j < k; ++j) l[i][k] -= l[i][j] * l[k][j];
      l[i][k] /= l[k][k];
    }
    for (std::size_t j = 0; j < 7; ++j) CHECK(h[k][j] == h[j][k]);
  }
  CHECK(spd);
}

TEST_CASE("backup potential") {
  const auto s = std::make_shared<QPStructure>(two_node_mass(), 0.0);
  const NodalBounds b = local_bounds(2, GlobalBox{0.0, 1.0});
  const auto scaling = ConstraintScaling::fully_discrete(1.0);
  {
    const Vector u{0.0, 0.0}, r{1.0, -0.5};
    const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, b, scaling, Vector{0.0, 0.0});
    const BackupResult br = backup_potential(qp, r, u, b, scaling);
    CHECK(br.rho == doctest::Approx(0.5));
    CHECK(br.omega == Vector{1.0, 1.0});
    CHECK(br.r_backup[0] == doctest::Approx(0.25));
    CHECK(br.r_backup[1] == doctest::Approx(0.25));
    CHECK(br.c_backup == doctest::Approx(0.25));
    CHECK(std::abs(sum(br.r_backup) - sum(r)) <= 1e-15);
    CHECK(br.cfl_satisfied);
    const Vector lu = spmv(s->laplacian(), br.udot_backup);
    CHECK(lu[0] == doctest::Approx(-0.75));
    CHECK(lu[1] == doctest::Approx(0.75));
    CHECK(qp.max_violation(br.udot_backup) <= 1e-12);
  }
  {
    const Vector u{0.3, 0.6}, r{0.0, 0.0};
    const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, b, scaling, Vector{0.0, 0.0});
    const BackupResult br = backup_potential(qp, r, u, b, scaling);
    CHECK(br.rho == 0.0);
    CHECK(br.omega == Vector{0.0, 0.0});
    CHECK(norm_inf(br.r_backup) == 0.0);
    CHECK(norm_inf(br.udot_backup) == 0.0);
  }
  {
    const Vector u{1.0, 1.0}, r{0.2, 0.1};
    const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, b, scaling, Vector{0.0, 0.0});
    CHECK_THROWS_AS(backup_potential(qp, r, u, b, scaling), InfeasibleBackup);
  }
}

TEST_CASE("property: backup potential is feasible whenever the CFL-like condition holds") {
  std::mt19937 rng(41);
  const Mesh m = build_unit_square(6);
  const auto s = std::make_shared<QPStructure>(assemble(m, op::ConsistentMass{}), 0.01);
  const std::size_t n = s->num_nodes();
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Vector u = uniform(rng, n, 0.0, 1.0);
    Vector r = uniform(rng, n, -0.5, 0.5);
    for (std::size_t i = 0; i < n; ++i) r[i] *= s->lumped_mass()[i];
    const double dt = std::uniform_real_distribution<double>(1e-3, 2.0)(rng);
    const NodalBounds b = trial % 2 ? local_bounds(n, GlobalBox{0.0, 1.0}) : local_bounds(u, *m.pattern());
    const auto scaling = ConstraintScaling::fully_discrete(dt);
    const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, b, scaling, Vector(n, 0.0));
    BackupResult br;
    try {
      br = backup_potential(qp, r, u, b, scaling);
    } catch (const InfeasibleBackup&) {
      continue;
    }
    CHECK(std::abs(sum(br.r_backup) - sum(r)) <= 1e-11 * std::max(1.0, oracle::max_abs(r)) * n);
    CHECK(br.c_backup >= 0.0);
    if (!br.cfl_satisfied) continue;
    ++checked;
    CHECK(qp.max_violation(br.udot_backup) <= 1e-10 * std::max(1.0, qp.scale()));
  }
  CHECK(checked > 50);
}

TEST_CASE("property: feasible potentials reconstruct states within bounds and vice versa") {
  std::mt19937 rng(19);
  const Mesh m = build_unit_square(5);
  const auto s = std::make_shared<QPStructure>(assemble(m, op::ConsistentMass{}), 0.01);
  const std::size_t n = s->num_nodes();
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Vector u = uniform(rng, n, 0.0, 1.0);
    Vector r = uniform(rng, n, -0.05, 0.05);
    const double dt = 0.2;
    const NodalBounds b = local_bounds(u, *m.pattern());
    const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, b, ConstraintScaling::fully_discrete(dt),
                                   Vector(n, 0.0));
    const Vector udot = uniform(rng, n, -0.3, 0.3);
    const Vector state = reconstruct_state(*s, u, r, dt, udot);
    bool in_bounds = true;
    for (std::size_t i = 0; i < n; ++i) in_bounds = in_bounds && oracle::within(state[i], b.u_min[i], b.u_max[i], 1e-10);
    const bool ok = qp.max_violation(udot) <= 1e-10 * std::max(1.0, qp.scale()) * 1e-2;
    CHECK(ok == in_bounds);
    (ok ? feasible : infeasible)++;
  }
  CHECK(infeasible > 0);
}

TEST_CASE("reconstruct_state reproduces the target state at the target potential") {
  std::mt19937 rng(3);
  const Mesh m = build_unit_square(5);
  const auto s = std::make_shared<QPStructure>(assemble(m, op::ConsistentMass{}), 0.01);
  const std::size_t n = s->num_nodes();
  const Vector u = uniform(rng, n, 0.0, 1.0), r = uniform(rng, n, -0.1, 0.1), target = uniform(rng, n, -1.0, 1.0);
  const double dt = 0.05;
  // Target state u_T = u + dt / m (r + (M_L - M_C) udot_T), evaluated with a dense product.
  const Vector lt = oracle::matvec(s->laplacian().to_dense(), target);
  const Vector state = reconstruct_state(*s, u, r, dt, target);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::abs(state[i] - (u[i] + dt / s->lumped_mass()[i] * (r[i] + lt[i]))) <= 1e-12);
  // Changing the potential away from the stencil of node 0 leaves node 0 untouched.
  Vector moved = target;
  moved[m.node_at(4, 4)] += 1.0;
  CHECK(std::abs(reconstruct_state(*s, u, r, dt, moved)[m.node_at(0, 0)] - state[m.node_at(0, 0)]) <= 1e-12);
}

TEST_CASE("warm start") {
  const Mesh m = build_unit_square(6);
  const VelocityField v{[](Point p) { return Point{0.5 - p.y, p.x - 0.5}; }};
  const SparseMatrix d = artificial_diffusion(assemble(m, op::Advection{v}));
  const auto s = std::make_shared<QPStructure>(assemble(m, op::ConsistentMass{}), 0.01);
  const std::size_t n = s->num_nodes();
  const FluxSet none(m.pattern());
  CHECK(norm_inf(warm_start(*s, d, Vector(n, 0.7), none)) <= 1e-12);

  std::mt19937 rng(4);
  const Vector u = uniform(rng, n, 0.0, 1.0);
  const Vector w = warm_start(*s, d, u, none);
  const Vector ref = oracle::pseudo_inverse_solve(s->laplacian().to_dense(), oracle::matvec(d.to_dense(), u));
  CHECK(oracle::max_abs_diff(w, ref) <= 1e-10);
  CHECK(std::abs(sum(w)) <= 1e-10);

  const FluxSet f = difference_flux(s->consistent_mass(), uniform(rng, n, -1.0, 1.0));
  const Vector wf = warm_start(*s, d, u, f);
  Vector rhs = oracle::matvec(d.to_dense(), u);
  const Vector g = apply_fluxes(f);
  for (std::size_t i = 0; i < n; ++i) rhs[i] += g[i];
  CHECK(oracle::max_abs_diff(wf, oracle::pseudo_inverse_solve(s->laplacian().to_dense(), rhs)) <= 1e-10);
}

TEST_CASE("interior potential and strictly feasible start") {
  std::mt19937 rng(9);
  const auto s = std::make_shared<QPStructure>(path_mass(6), 0.01);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_instance(rng, s);
    if (!inst) continue;
    ++checked;
    const QPInstance& qp = inst->qp;
    const Vector y = interior_potential(qp);
    const Vector si = qp.slack(y);
    for (double v : si) CHECK(v > 0.0);
    const Vector bad = uniform(rng, 6, -50.0, 50.0);
    const Vector fixed = strictly_feasible_start(qp, bad, y, 1e-3);
    const Vector sf = qp.slack(fixed);
    for (std::size_t k = 0; k < sf.size(); ++k) CHECK(sf[k] >= 1e-3 * si[k] * (1.0 - 1e-9));
    const Vector same = strictly_feasible_start(qp, y, y, 1e-3);
    CHECK(same == y);
  }
  CHECK(checked > 20);
}

TEST_CASE("potentials to fluxes") {
  const SparseMatrix mc = two_node_mass();
  const FluxSet g = potentials_to_fluxes(mc, Vector{1.0, -1.0});
  CHECK(g.at(0, 1) == doctest::Approx(0.5));
  CHECK(g.at(1, 0) == doctest::Approx(-0.5));
  CHECK(potentials_to_fluxes(mc, Vector{3.0, 3.0}).max_abs() == 0.0);

  std::mt19937 rng(13);
  const auto s = std::make_shared<QPStructure>(assemble(build_punched_square(9), op::ConsistentMass{}), 0.01);
  const Vector x = uniform(rng, s->num_nodes(), -1.0, 1.0);
  const FluxSet f = potentials_to_fluxes(s->consistent_mass(), x);
  CHECK(f.antisymmetric(1e-12));
  const Vector gi = apply_fluxes(f), lx = spmv(s->laplacian(), x);
  CHECK(oracle::max_abs_diff(gi, lx) <= 1e-12 * std::max(1.0, norm_inf(lx)));
  CHECK(std::abs(sum(gi)) <= 1e-12 * f.sum_abs());
}

TEST_CASE("barrier solve on a single active constraint") {
  const auto s = std::make_shared<QPStructure>(two_node_mass(), 0.0);
  const QPInstance qp{s, QPVariant::FullyDiscrete, Vector{2.0, -2.0}, Vector{-0.5, -0.5}, Vector{0.5, 0.5}};
  const BarrierResult res = barrier_newton_solve(qp, Vector{0.0, 0.0});
  CHECK(res.udot[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.udot[1] == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(res.report.objective_final == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.report.max_complementarity <= 10.0 * BarrierConfig{}.sigma_min);
  CHECK_FALSE(res.report.unconstrained);
}

TEST_CASE("barrier solve returns an interior target") {
  std::mt19937 rng(2);
  const auto s = std::make_shared<QPStructure>(path_mass(6), 0.0);
  const Vector t = uniform(rng, 6, -0.1, 0.1);
  const QPInstance qp{s, QPVariant::FullyDiscrete, t, Vector(6, -10.0), Vector(6, 10.0)};
  for (bool shortcut : {true, false}) {
    BarrierConfig cfg;
    cfg.try_unconstrained = shortcut;
    const BarrierResult res = barrier_newton_solve(qp, Vector(6, 0.0), cfg);
    CHECK(oracle::max_abs_diff(res.udot, t) <= 1e-6);
    CHECK(res.report.unconstrained == shortcut);
  }
}

TEST_CASE("property: barrier solve matches the active-set oracle on random small instances") {
  std::mt19937 rng(1234);
  const auto s = std::make_shared<QPStructure>(path_mass(6), 0.01);
  int checked = 0, active = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const auto inst = random_instance(rng, s);
    if (!inst) continue;
    const QPInstance& qp = inst->qp;
    const auto ref = oracle_solve(qp);
    REQUIRE(std::isfinite(ref.value));
    BarrierConfig cfg;
    cfg.keep_trace = true;
    const Vector init = interior_potential(qp);
    const BarrierResult res = barrier_newton_solve(qp, init, cfg);
    ++checked;
    active += !res.report.unconstrained;
    CHECK(std::abs(res.report.objective_final - ref.value) <= 1e-6 * std::max(1.0, std::abs(ref.value)));
    CHECK(qp.max_violation(res.udot) <= 1e-9 * std::max(1.0, qp.scale()));
    CHECK(res.report.objective_final <= objective(qp, init).value + 1e-12);
    CHECK(res.report.max_complementarity <= 10.0 * cfg.sigma_min);
    bool interior = true;
    for (const auto& e : res.report.trace)
      if (e.accepted) interior = interior && e.min_slack > 0.0 && e.min_lambda > 0.0;
    CHECK(interior);
  }
  CHECK(checked > 40);
  CHECK(active > 20);
}

TEST_CASE("barrier solve from an infeasible start repairs it") {
  std::mt19937 rng(77);
  const auto s = std::make_shared<QPStructure>(path_mass(6), 0.01);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = random_instance(rng, s);
    if (!inst) continue;
    const Vector bad = uniform(rng, 6, -100.0, 100.0);
    if (inst->qp.max_violation(bad) == 0.0) continue;
    BarrierConfig cfg;
    cfg.try_unconstrained = false;
    const BarrierResult res = barrier_newton_solve(inst->qp, bad, cfg);
    CHECK(res.report.start_repaired);
    CHECK(std::abs(res.report.objective_final - oracle_solve(inst->qp).value) <= 1e-6);
  }
}

TEST_CASE("barrier solve with fixed potentials") {
  std::mt19937 rng(15);
  std::vector<bool> fixed(6, false);
  fixed[0] = fixed[5] = true;
  const auto s = std::make_shared<QPStructure>(path_mass(6), 0.01, fixed);
  CHECK(s->num_free() == 4);
  const Vector full = uniform(rng, 6, -1.0, 1.0);
  const Vector back = s->expand(s->restrict(full));
  CHECK(back[0] == 0.0);
  CHECK(back[2] == full[2]);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Vector u = uniform(rng, 6, 0.0, 1.0), r = uniform(rng, 6, -0.05, 0.05), t = uniform(rng, 6, -2.0, 2.0);
    const QPInstance qp = build_qp(QPVariant::FullyDiscrete, s, u, r, local_bounds(6, GlobalBox{0.0, 1.0}),
                                   ConstraintScaling::fully_discrete(0.5), t);
    bool open = true;
    for (std::size_t a = 0; a < qp.lower.size(); ++a) open = open && qp.lower[a] < 0.0 && qp.upper[a] > 0.0;
    if (!open) continue;
    ++checked;
    const BarrierResult res = barrier_newton_solve(qp, interior_potential(qp));
    CHECK(res.udot[0] == 0.0);
    CHECK(res.udot[5] == 0.0);
    CHECK(std::abs(res.report.objective_final - oracle_solve(qp).value) <= 1e-6);
  }
  CHECK(checked > 10);
}

TEST_CASE("barrier solve reports exhausted iterations") {
  const auto s = std::make_shared<QPStructure>(two_node_mass(), 0.0);
  const QPInstance qp{s, QPVariant::FullyDiscrete, Vector{2.0, -2.0}, Vector{-0.5, -0.5}, Vector{0.5, 0.5}};
  BarrierConfig cfg;
  cfg.max_newton_iters = 2;
  CHECK_THROWS_AS(barrier_newton_solve(qp, Vector{0.0, 0.0}, cfg), NotConverged);
}
