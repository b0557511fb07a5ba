// OpenMP kernels against their serial references on an n x n mesh.

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "fluxpot/assembly.hpp"
#include "fluxpot/benchmarks.hpp"
#include "fluxpot/limiters.hpp"

using namespace fluxpot;

namespace {

struct Fixture {
  explicit Fixture(std::size_t n) : mesh(build_unit_square(n)) {
    mc = assemble(mesh, op::ConsistentMass{});
    k = assemble(mesh, op::Advection{problems::rotation_velocity()});
    d = artificial_diffusion(k);
    ml = lumped_masses(mc);
    u = interpolate(mesh, problems::rotation_initial);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector x(mesh.num_nodes());
    for (double& v : x) v = dist(rng);
    f = difference_flux(mc, x);
    bounds = local_bounds(u, *mesh.pattern());
  }
  Mesh mesh;
  SparseMatrix mc, k, d;
  Vector ml, u;
  FluxSet f;
  NodalBounds bounds;
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

template <bool Parallel>
void BM_Spmv(benchmark::State& st) {
  const auto& fx = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? spmv(fx.k, fx.u) : serial::spmv(fx.k, fx.u));
}

template <bool Parallel>
void BM_Assemble(benchmark::State& st) {
  const auto& fx = fixture(static_cast<std::size_t>(st.range(0)));
  const OperatorKind kind = op::Advection{problems::rotation_velocity()};
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? assemble(fx.mesh, kind) : serial::assemble(fx.mesh, kind));
}

template <bool Parallel>
void BM_Fct(benchmark::State& st) {
  const auto& fx = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? fct_limit(fx.f, fx.u, fx.bounds, fx.ml, 1e-3)
                                      : serial::fct_limit(fx.f, fx.u, fx.bounds, fx.ml, 1e-3));
}

template <bool Parallel>
void BM_Mcl(benchmark::State& st) {
  const auto& fx = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(Parallel ? mcl_limit(fx.f, fx.u, fx.d, fx.bounds, &fx.k)
                                      : serial::mcl_limit(fx.f, fx.u, fx.d, fx.bounds, &fx.k));
}

template <bool Parallel>
void BM_ApplyFluxes(benchmark::State& st) {
  const auto& fx = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Parallel ? apply_fluxes(fx.f) : serial::apply_fluxes(fx.f));
}

}  // namespace

BENCHMARK(BM_Spmv<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_Spmv<true>)->Arg(128)->Arg(256);
BENCHMARK(BM_Assemble<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_Assemble<true>)->Arg(128)->Arg(256);
BENCHMARK(BM_Fct<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_Fct<true>)->Arg(128)->Arg(256);
BENCHMARK(BM_Mcl<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_Mcl<true>)->Arg(128)->Arg(256);
BENCHMARK(BM_ApplyFluxes<false>)->Arg(128)->Arg(256);
BENCHMARK(BM_ApplyFluxes<true>)->Arg(128)->Arg(256);

BENCHMARK_MAIN();
