#include <benchmark/benchmark.h>

#include "sparsewalk/raysensor.hpp"

namespace sw = sparsewalk;

namespace {

sw::terrain::HeightField stairs() {
  sw::terrain::TerrainSpec spec;
  spec.kind = sw::terrain::TerrainKind::Stairs;
  sw::Rng rng = sw::make_rng(1);
  return sw::terrain::build_terrain(spec, rng);
}

void BM_Raycast(benchmark::State& state) {
  const auto field = stairs();
  const auto dirs = sw::raysensor::ray_directions(sw::raysensor::RayConfig{});
  double x = 0.0;
  for (auto _ : state) {
    for (const auto& d : dirs) {
      benchmark::DoNotOptimize(sw::raysensor::raycast(field, {x, 0.9}, d, 0.1, 8.0));
    }
    x = x > 4.0 ? 0.0 : x + 0.01;
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(dirs.size()));
}
BENCHMARK(BM_Raycast);

void BM_Sense(benchmark::State& state) {
  const auto field = stairs();
  const sw::raysensor::RayConfig cfg;
  sw::Rng rng = sw::make_rng(2);
  sw::raysensor::TrunkPose pose;
  pose.z = 0.5;
  const double sigma = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sw::raysensor::sense(field, pose, cfg, sigma, {}, rng));
    pose.x = pose.x > 4.0 ? 0.0 : pose.x + 0.01;
  }
}
BENCHMARK(BM_Sense)->Arg(0)->Arg(3);

void BM_BuildTerrain(benchmark::State& state) {
  sw::terrain::TerrainSpec spec;
  spec.kind = sw::terrain::TerrainKind::AlternatingStairs;
  spec.params.stair_run_sequence = {0.2, 0.3, 0.4, 0.5, 0.25, 0.35, 0.45, 0.55};
  sw::Rng rng = sw::make_rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sw::terrain::build_terrain(spec, rng));
  }
}
BENCHMARK(BM_BuildTerrain);

}  // namespace
