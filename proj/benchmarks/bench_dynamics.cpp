#include <benchmark/benchmark.h>

#include "sparsewalk/dynamics.hpp"
#include "sparsewalk/env.hpp"

namespace sw = sparsewalk;

namespace {

void BM_PhysicsStep(benchmark::State& state) {
  const sw::dynamics::RobotModel model;
  const sw::dynamics::ContactParams contact;
  const sw::terrain::HeightField flat;
  const auto target = sw::dynamics::nominal_joint_pose(model);
  sw::dynamics::RobotState s = sw::dynamics::nominal_state(model);
  for (int i = 0; i < 400; ++i) s = sw::dynamics::step(s, target, flat, model, contact);
  for (auto _ : state) {
    s = sw::dynamics::step(s, target, flat, model, contact);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PhysicsStep);

void BM_EquationsOfMotion(benchmark::State& state) {
  const sw::dynamics::RobotModel model;
  const sw::dynamics::RobotState s = sw::dynamics::nominal_state(model);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sw::dynamics::equations_of_motion(s.q, s.v, model));
  }
}
BENCHMARK(BM_EquationsOfMotion);

void BM_EnvStep(benchmark::State& state) {
  const sw::env::EnvConfig cfg;
  sw::env::Task task;
  task.terrain.kind = sw::terrain::TerrainKind::Stairs;
  task.v_ref_x = 0.5;
  task.episode_limit = 1 << 30;
  sw::env::Episode ep(cfg, task, 1);
  const auto target = sw::dynamics::nominal_joint_pose(cfg.model);
  for (auto _ : state) {
    if (ep.done()) {
      state.PauseTiming();
      ep = sw::env::Episode(cfg, task, 1);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(ep.step(target));
  }
}
BENCHMARK(BM_EnvStep);

}  // namespace
