#include <benchmark/benchmark.h>

#include "sparsewalk/learn/ppo.hpp"

namespace sw = sparsewalk;
using namespace sw::learn;

namespace {

Matrix random_obs(int rows, int cols, sw::Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_PolicyForward(benchmark::State& state) {
  sw::Rng rng = sw::make_rng(1);
  const PolicyParams p = make_policy(PolicyLayout{}, rng);
  const Matrix obs = random_obs(34, static_cast<int>(state.range(0)), rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy_forward(p, obs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PolicyForward)->Arg(1)->Arg(100)->Arg(6400);

void BM_PpoLossGradient(benchmark::State& state) {
  sw::Rng rng = sw::make_rng(2);
  const PolicyParams p = make_policy(PolicyLayout{}, rng);
  const int n = static_cast<int>(state.range(0));
  Batch b;
  b.obs = random_obs(34, n, rng);
  b.actions = random_obs(8, n, rng);
  b.logp_old = Vector::Constant(n, -8.0);
  b.advantages = random_obs(n, 1, rng);
  b.returns = random_obs(n, 1, rng);
  PolicyParams grad = zeros_like(p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ppo_loss(b, p, PPOConfig{}, &grad));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_PpoLossGradient)->Arg(256)->Arg(6400)->Unit(benchmark::kMillisecond);

void BM_Gae(benchmark::State& state) {
  sw::Rng rng = sw::make_rng(3);
  const int n = 256;
  const Vector r = random_obs(n, 1, rng);
  const Vector v = random_obs(n, 1, rng);
  const std::vector<std::uint8_t> d(n, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gae(r, v, d, 0.0, 0.996, 0.95));
  }
}
BENCHMARK(BM_Gae);

}  // namespace
