#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsewalk/learn/policy.hpp"

namespace sparsewalk::learn {

enum class OptimizerKind { Adam, Sgd };

std::string_view to_string(OptimizerKind kind);

struct PPOConfig {
  double gamma = 0.996;
  double lambda = 0.95;
  double clip = 0.2;
  double learning_rate = 2e-4;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int epochs = 4;
  int minibatches = 4;
  double max_grad_norm = 0.5;
  double min_policy_noise = 0.2;
  int n_envs = 100;
  int horizon = 256;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  bool operator==(const PPOConfig&) const = default;
};

void validate(const PPOConfig& cfg);

/// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t, A_t = delta_t + gamma lambda (1 - done_t) A_{t+1},
/// with V_T = bootstrap. Returns (advantages, returns = A + V).
std::pair<Vector, Vector> gae(const Vector& rewards, const Vector& values,
                              const std::vector<std::uint8_t>& dones, double bootstrap,
                              double gamma, double lambda);

/// Rectangular (n_envs x horizon) rollout storage. Column t * n_envs + env holds one transition.
struct RolloutBuffer {
  int n_envs = 0;
  int horizon = 0;
  Matrix obs;
  Matrix actions;
  Vector logp;
  Vector rewards;
  Vector values;
  std::vector<std::uint8_t> dones;
  Vector bootstrap;  // value of the observation after the last step, per env
  Vector advantages;
  Vector returns;

  RolloutBuffer() = default;
  RolloutBuffer(int n_envs, int horizon, int obs_dim, int action_dim);

  int size() const { return n_envs * horizon; }
  int index(int env, int t) const { return t * n_envs + env; }
  void compute_advantages(double gamma, double lambda);
};

struct Batch {
  Matrix obs;
  Matrix actions;
  Vector logp_old;
  Vector advantages;
  Vector returns;
};

Batch gather(const RolloutBuffer& buffer, const std::vector<int>& columns);

struct LossStats {
  double loss = 0.0;
  double surrogate = 0.0;  // -E[min(rho A, clip(rho) A)]
  double value = 0.0;      // E[(V - R)^2]
  double entropy = 0.0;    // E[entropy]
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

/// Clipped surrogate + value_coef * value MSE - entropy_coef * entropy. Advantages are
/// normalized within the batch when it holds more than one sample. When `grad` is set it
/// receives dLoss/dparams.
LossStats ppo_loss(const Batch& batch, const PolicyParams& params, const PPOConfig& cfg,
                   PolicyParams* grad = nullptr);

/// Scales `grad` so its global norm is at most `max_norm`; returns the norm before clipping.
double clip_grad_norm(PolicyParams& grad, double max_norm);

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(const PPOConfig& cfg, const PolicyParams& shape);

  /// Descends along `grad` (the loss gradient).
  void apply(PolicyParams& params, const PolicyParams& grad);

  std::int64_t steps() const { return steps_; }
  const PolicyParams& first_moment() const { return m_; }
  const PolicyParams& second_moment() const { return v_; }

 private:
  OptimizerKind kind_ = OptimizerKind::Adam;
  double lr_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t steps_ = 0;
  PolicyParams m_;
  PolicyParams v_;
};

struct UpdateStats {
  double loss = 0.0;
  double surrogate = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;  ///< mean pre-clip global norm
  double policy_noise = 0.0;
};

/// epochs x minibatches shuffled gradient steps with global norm clipping. On non-finite
/// gradients `params` is restored and DivergenceError is thrown.
UpdateStats ppo_update(const RolloutBuffer& buffer, PolicyParams& params, Optimizer& optimizer,
                       const PPOConfig& cfg, Rng& rng);

}  // namespace sparsewalk::learn
