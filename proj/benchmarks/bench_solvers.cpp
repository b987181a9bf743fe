#include <benchmark/benchmark.h>

#include <cmath>

#include "lab/control.hpp"
#include "lab/hammerstein.hpp"
#include "lab/state.hpp"

using namespace lab;

namespace {

EllipticProblem make_problem(int n, double p) {
  const GridSpec g{n, n};
  ClassParams params;
  params.p = p;
  params.alpha = 0.5;
  params.beta = 2.0;
  std::vector<double> ones1(g.ny - 1, 1.0), ones2(g.nx - 1, 1.0);
  NodeField f(g.nodes());
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      f[g.node(i, j)] = std::sin(M_PI * g.x(i)) * std::sin(M_PI * g.y(j));
    }
  }
  return EllipticProblem{make_diagonal_control(ones1, ones2, g, params), f,
                         rasterize(ShapeSpec::Disk(0.5, 0.5, 0.4), g), params, {}};
}

void BM_SolveStateP2(benchmark::State& state) {
  const EllipticProblem prob = make_problem(static_cast<int>(state.range(0)), 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_state(prob));
  }
}
BENCHMARK(BM_SolveStateP2)->Arg(33)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_SolveStateP3(benchmark::State& state) {
  const EllipticProblem prob = make_problem(static_cast<int>(state.range(0)), 3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_state(prob));
  }
}
BENCHMARK(BM_SolveStateP3)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

void BM_ApplyKernel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g{n, n};
  const GridDomain dom = rasterize(ShapeSpec::Disk(0.5, 0.5, 0.4), g);
  KernelSpec k;
  k.sigma = 0.15;
  k.scale = 1.0;
  k.ridge = 0.5;
  NodeField w(g.nodes(), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_B(k, w, dom));
  }
}
BENCHMARK(BM_ApplyKernel)->Arg(65)->Arg(129)->Arg(257);

void BM_SolveHammerstein(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const EllipticProblem prob = make_problem(n, 3.0);
  const StateField y = solve_state(prob);
  NodeField gd(prob.domain.grid.nodes(), 0.0);
  for (int node = 0; node < prob.domain.grid.nodes(); ++node) {
    if (prob.domain.mask[node]) gd[node] = 1.0;
  }
  KernelSpec k;
  k.sigma = 0.15;
  k.scale = 1.0;
  k.ridge = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_hammerstein(y, gd, k, 3.0));
  }
}
BENCHMARK(BM_SolveHammerstein)->Arg(33)->Arg(65)->Unit(benchmark::kMillisecond);

}  // namespace
