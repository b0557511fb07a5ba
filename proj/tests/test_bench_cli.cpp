#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "fluxpot/assembly.hpp"
#include "fluxpot/benchmarks.hpp"
#include "fluxpot/error.hpp"
#include "fluxpot/io.hpp"
#include "oracles.hpp"

using namespace fluxpot;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) { return (fs::temp_directory_path() / ("fluxpot_" + name)).string(); }

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Bilinear field with lexicographic nodal values on the n x n unit square, evaluated independently of the library.
double nodal_bilinear(std::size_t n, const std::vector<double>& u, double x, double y) {
  const double h = 1.0 / static_cast<double>(n);
  const auto ix = std::min(static_cast<std::size_t>(x / h), n - 1);
  const auto iy = std::min(static_cast<std::size_t>(y / h), n - 1);
  const double x0 = static_cast<double>(ix) * h, y0 = static_cast<double>(iy) * h;
  const std::size_t row = n + 1;
  const std::size_t c[4] = {iy * row + ix, iy * row + ix + 1, (iy + 1) * row + ix + 1, (iy + 1) * row + ix};
  double v = 0.0;
  for (int k = 0; k < 4; ++k) v += u[c[k]] * oracle::bilinear(x0, y0, h, k, x, y);
  return v;
}

ProblemSpec short_sbr(Scheme scheme) {
  ProblemSpec spec = default_spec(Problem::SolidBodyRotation, scheme, 8);
  spec.cfg.dt = 1e-2;
  spec.cfg.t_final = 0.1;
  return spec;
}

}  // namespace

TEST_CASE("problem names") {
  CHECK(parse_problem("sbr") == Problem::SolidBodyRotation);
  CHECK(parse_problem("steady") == Problem::SteadyCircularAdvection);
  CHECK(parse_problem("diffusion") == Problem::AnisotropicDiffusion);
  CHECK_THROWS(parse_problem("nope"));
  for (auto p : {Problem::SolidBodyRotation, Problem::SteadyCircularAdvection, Problem::AnisotropicDiffusion})
    CHECK(parse_problem(to_string(p)) == p);
}

TEST_CASE("default specs") {
  const auto sbr = default_spec(Problem::SolidBodyRotation, Scheme::ObppFullyDiscrete, 64);
  CHECK(sbr.cfg.t_final == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(sbr.mu == 0.01);
  CHECK(sbr.cfg.bounds.mode == BoundsMode::GlobalBox);
  CHECK(default_spec(Problem::SolidBodyRotation, Scheme::FCT, 64).cfg.bounds.mode == BoundsMode::LocalStencil);
  const auto st = default_spec(Problem::SteadyCircularAdvection, Scheme::MCL, 64);
  CHECK(st.cfg.t_final == 9.5);
  const auto dif = default_spec(Problem::AnisotropicDiffusion, Scheme::ObppFullyDiscrete, 18);
  CHECK(dif.cfg.dt == 1e-6);
  CHECK(dif.cfg.t_final == 2e-2);
  CHECK(dif.cfg.bounds.box.lo == -1.0);
  CHECK(dif.cfg.bounds.box.hi == 1.0);
}

TEST_CASE("benchmark mesh compatibility") {
  CHECK(benchmark_mesh(Problem::AnisotropicDiffusion, 9).num_cells() == 80);
  CHECK_THROWS_AS(benchmark_mesh(Problem::AnisotropicDiffusion, 10), ContractViolation);
  CHECK(benchmark_mesh(Problem::SolidBodyRotation, 10).num_cells() == 100);
}

TEST_CASE("initial states") {
  const Mesh m = benchmark_mesh(Problem::AnisotropicDiffusion, 9);
  const Vector u = initial_state(Problem::AnisotropicDiffusion, m);
  const auto inner = m.nodes_with_tag(BoundaryTag::Inner);
  const auto outer = m.nodes_with_tag(BoundaryTag::Outer);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (outer[i]) CHECK(u[i] == -1.0);
    else if (inner[i]) CHECK(u[i] == 1.0);
    else CHECK(u[i] == 0.0);
  }
  const Mesh sq = benchmark_mesh(Problem::SolidBodyRotation, 16);
  const Vector r = initial_state(Problem::SolidBodyRotation, sq);
  for (double v : r) CHECK(oracle::within(v, 0.0, 1.0, 0.0));
}

TEST_CASE("evaluate reproduces nodal values and bilinear interior") {
  const std::size_t n = 5;
  const Mesh m = build_unit_square(n);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> u(m.num_nodes());
  for (double& v : u) v = d(rng);
  for (std::size_t i = 0; i < m.num_nodes(); ++i)
    CHECK(evaluate(m, u, m.nodes()[i]) == doctest::Approx(u[i]).epsilon(1e-14));
  std::uniform_real_distribution<double> p(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double x = p(rng), y = p(rng);
    CHECK(evaluate(m, u, {x, y}) == doctest::Approx(nodal_bilinear(n, u, x, y)).epsilon(1e-13));
  }
}

TEST_CASE("error norms of identical fields vanish") {
  const Mesh m = build_unit_square(6);
  const Vector u = interpolate(m, [](Point q) { return q.x * q.y + 0.25; });
  const auto e = error_norms(m, u, [&](Point q) { return evaluate(m, u, q); });
  CHECK(e.l1 < 1e-15);
  CHECK(e.l2 < 1e-15);
  const auto self = error_norms(m, u, m, u);
  CHECK(self.l1 < 1e-15);
  CHECK(self.l2 < 1e-15);
}

TEST_CASE("error norms of a constant offset") {
  const double delta = 0.37;
  for (auto problem : {Problem::SolidBodyRotation, Problem::AnisotropicDiffusion}) {
    const Mesh m = benchmark_mesh(problem, 9);
    const Vector u = interpolate(m, [](Point q) { return std::sin(q.x) + q.y; });
    const auto e = error_norms(m, u, [&](Point q) { return evaluate(m, u, q) + delta; });
    CHECK(std::abs(e.l1 - delta * m.area()) <= 1e-12);
    CHECK(std::abs(e.l2 - delta * std::sqrt(m.area())) <= 1e-12);
  }
}

TEST_CASE("error norms of a random bilinear field against refined midpoint sums") {
  const std::size_t n = 4;
  const Mesh m = build_unit_square(n);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  // shift 2 keeps u_h - ref of one sign, where 3x3 Gauss resolves |u_h - ref|;
  // shift 0 crosses zero inside cells and only the looser bound holds for L1
  for (double shift : {2.0, 0.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> u(m.num_nodes());
      for (double& v : u) v = d(rng);
      auto ref = [&](double x, double y) { return 0.3 * std::sin(3.0 * x) * std::cos(2.0 * y) - shift; };
      const auto e = error_norms(m, u, [&](Point q) { return ref(q.x, q.y); });
      const double l1 = oracle::refined_midpoint(n, 128, [&](double x, double y) {
        return std::abs(nodal_bilinear(n, u, x, y) - ref(x, y));
      });
      const double l2 = std::sqrt(oracle::refined_midpoint(n, 128, [&](double x, double y) {
        const double r = nodal_bilinear(n, u, x, y) - ref(x, y);
        return r * r;
      }));
      CHECK(std::abs(e.l1 - l1) <= (shift > 0.0 ? 1e-3 : 1e-2) * l1);
      CHECK(std::abs(e.l2 - l2) <= 1e-3 * l2);
    }
  }
}

TEST_CASE("fine-grid error norms") {
  const Mesh coarse = build_unit_square(3);
  const Mesh fine = build_unit_square(9);
  auto f = [](Point q) { return q.x + 2.0 * q.y; };
  const Vector uc = interpolate(coarse, f);
  const Vector uf = interpolate(fine, f);
  const auto e = error_norms(coarse, uc, fine, uf);
  CHECK(e.l1 < 1e-14);
  CHECK_THROWS_AS(error_norms(coarse, uc, build_unit_square(10), interpolate(build_unit_square(10), f)),
                  ContractViolation);
}

TEST_CASE("convergence rates") {
  const auto rows = convergence_table({18, 36}, {6.4831e-2, 3.2154e-2});
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].rate.has_value());
  CHECK(*rows[1].rate == doctest::Approx(1.0117).epsilon(1e-4));
  CHECK(*convergence_table({4, 8}, {0.5, 0.5})[1].rate == 0.0);
  const auto halving = convergence_table({4, 8, 16}, {0.4, 0.2, 0.1});
  CHECK(*halving[1].rate == doctest::Approx(1.0));
  CHECK(*halving[2].rate == doctest::Approx(1.0));

  const auto path = temp_path("conv.csv");
  write_convergence_csv(rows, path);
  std::ifstream is(path);
  std::string line;
  int count = 0;
  std::getline(is, line);
  CHECK(line == "inv_h,error,rate");
  while (std::getline(is, line)) ++count;
  CHECK(count == 2);
  fs::remove(path);
}

TEST_CASE("VTK output of a 2 x 2 mesh") {
  const Mesh m = build_unit_square(2);
  const Vector u(m.num_nodes(), 0.5);
  const auto path = temp_path("field.vtk");
  CHECK(format_from_path(path) == FieldFormat::Vtk);
  write_field(m, u, path, FieldFormat::Vtk);
  const std::string s = slurp(path);
  CHECK(s.starts_with("# vtk DataFile Version 3.0"));
  CHECK(s.find("UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(s.find("POINTS 9 double") != std::string::npos);
  CHECK(s.find("CELLS 4 20") != std::string::npos);
  CHECK(s.find("CELL_TYPES 4\n9\n9\n9\n9\n") != std::string::npos);
  CHECK(s.find("POINT_DATA 9\nSCALARS u double") != std::string::npos);
  fs::remove(path);
}

TEST_CASE("CSV output round trip") {
  const Mesh m = benchmark_mesh(Problem::AnisotropicDiffusion, 9);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector u(m.num_nodes());
  for (auto& v : u) v = d(rng) / 3.0;
  const auto path = temp_path("field.csv");
  CHECK(format_from_path(path) == FieldFormat::Csv);
  write_field(m, u, path, FieldFormat::Csv);
  const auto rows = read_field_csv(path);
  REQUIRE(rows.size() == m.num_nodes());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].x == m.nodes()[i].x);
    CHECK(rows[i].y == m.nodes()[i].y);
    CHECK(rows[i].u == u[i]);
  }
  fs::remove(path);
  CHECK_THROWS_AS(write_field(m, u, "/nonexistent-dir/x.csv", FieldFormat::Csv), Error);
}

TEST_CASE("short runs report bounds and conservation") {
  for (auto scheme : {Scheme::FCT, Scheme::MCL, Scheme::ObppFullyDiscrete}) {
    const RunReport r = run_benchmark(short_sbr(scheme));
    CAPTURE(to_string(scheme));
    CHECK(r.steps == 10);
    CHECK(r.bounds_ok);
    CHECK(r.u_min >= -1e-8);
    CHECK(r.u_max <= 1.0 + 1e-8);
    CHECK(r.conservation_drift <= 1e-10);
    CHECK(r.correction_imbalance <= 1e-12);
    REQUIRE(r.l1_error.has_value());
    CHECK(*r.l1_error > 0.0);
  }
}

TEST_CASE("identical specs give identical output files") {
  ProblemSpec spec = short_sbr(Scheme::ObppFullyDiscrete);
  spec.field_path = temp_path("det_a.csv");
  run_benchmark(spec);
  spec.field_path = temp_path("det_b.csv");
  run_benchmark(spec);
  const auto a = slurp(temp_path("det_a.csv")), b = slurp(temp_path("det_b.csv"));
  CHECK_FALSE(a.empty());
  CHECK(a == b);
  fs::remove(temp_path("det_a.csv"));
  fs::remove(temp_path("det_b.csv"));
}
