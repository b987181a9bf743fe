#include <benchmark/benchmark.h>

#include "lab/domain.hpp"

using namespace lab;

namespace {

GridDomain make_disk(int n) {
  return rasterize(ShapeSpec::Disk(0.5, 0.5, 0.35), GridSpec{n, n});
}

void BM_DistanceTransform(benchmark::State& state) {
  const GridDomain d = make_disk(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(distance_transform(d));
  }
}
BENCHMARK(BM_DistanceTransform)->Arg(65)->Arg(129)->Arg(257);

void BM_HcDistance(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridDomain a = make_disk(n);
  const GridDomain b =
      rasterize(ShapeSpec::Disk(0.55, 0.5, 0.3), GridSpec{n, n});
  for (auto _ : state) {
    benchmark::DoNotOptimize(hc_distance(a, b));
  }
}
BENCHMARK(BM_HcDistance)->Arg(65)->Arg(129);

void BM_Rasterize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec g{n, n};
  const ShapeSpec shape = ShapeSpec::Difference(
      ShapeSpec::Disk(0.5, 0.5, 0.4), ShapeSpec::Disk(0.5, 0.5, 0.1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize(shape, g));
  }
}
BENCHMARK(BM_Rasterize)->Arg(129)->Arg(257);

}  // namespace
