#include "sparsewalk/learn/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sparsewalk::learn {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

void validate(const PPOConfig& c) {
  if (!(c.gamma > 0 && c.gamma <= 1) || !(c.lambda > 0 && c.lambda <= 1)) {
    throw std::invalid_argument("gamma and lambda must be in (0, 1]");
  }
  if (!(c.clip > 0) || !(c.learning_rate > 0)) {
    throw std::invalid_argument("clip and learning_rate must be positive");
  }
  if (c.epochs < 1 || c.minibatches < 1) {
    throw std::invalid_argument("epochs and minibatches must be at least 1");
  }
  if (!(c.value_coef >= 0) || !(c.entropy_coef >= 0) || !(c.max_grad_norm > 0)) {
    throw std::invalid_argument("loss coefficients must be non-negative, max_grad_norm positive");
  }
  if (c.n_envs < 1 || c.horizon < 1 || c.n_envs * c.horizon < c.minibatches) {
    throw std::invalid_argument("n_envs * horizon must cover every minibatch");
  }
  if (!(c.min_policy_noise > 0)) {
    throw std::invalid_argument("min_policy_noise must be positive");
  }
}

std::pair<Vector, Vector> gae(const Vector& rewards, const Vector& values,
                              const std::vector<std::uint8_t>& dones, double bootstrap,
                              double gamma, double lambda) {
  const Eigen::Index n = rewards.size();
  if (values.size() != n || static_cast<Eigen::Index>(dones.size()) != n) {
    throw std::invalid_argument("gae: rewards, values and dones differ in length");
  }
  Vector adv(n);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * next_value * live - values[t];
    next_adv = delta + gamma * lambda * live * next_adv;
    adv[t] = next_adv;
    next_value = values[t];
  }
  return {adv, adv + values};
}

RolloutBuffer::RolloutBuffer(int n_envs_, int horizon_, int obs_dim, int action_dim)
    : n_envs(n_envs_),
      horizon(horizon_),
      obs(obs_dim, n_envs_ * horizon_),
      actions(action_dim, n_envs_ * horizon_),
      logp(n_envs_ * horizon_),
      rewards(n_envs_ * horizon_),
      values(n_envs_ * horizon_),
      dones(n_envs_ * horizon_, 0),
      bootstrap(Vector::Zero(n_envs_)),
      advantages(Vector::Zero(n_envs_ * horizon_)),
      returns(Vector::Zero(n_envs_ * horizon_)) {}

void RolloutBuffer::compute_advantages(double gamma, double lambda) {
  Vector r(horizon);
  Vector v(horizon);
  std::vector<std::uint8_t> d(horizon);
  for (int e = 0; e < n_envs; ++e) {
    for (int t = 0; t < horizon; ++t) {
      r[t] = rewards[index(e, t)];
      v[t] = values[index(e, t)];
      d[t] = dones[index(e, t)];
    }
    const auto [a, ret] = gae(r, v, d, bootstrap[e], gamma, lambda);
    for (int t = 0; t < horizon; ++t) {
      advantages[index(e, t)] = a[t];
      returns[index(e, t)] = ret[t];
    }
  }
}

Batch gather(const RolloutBuffer& buffer, const std::vector<int>& columns) {
  const auto n = static_cast<Eigen::Index>(columns.size());
  Batch b;
  b.obs.resize(buffer.obs.rows(), n);
  b.actions.resize(buffer.actions.rows(), n);
  b.logp_old.resize(n);
  b.advantages.resize(n);
  b.returns.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = columns[i];
    b.obs.col(i) = buffer.obs.col(c);
    b.actions.col(i) = buffer.actions.col(c);
    b.logp_old[i] = buffer.logp[c];
    b.advantages[i] = buffer.advantages[c];
    b.returns[i] = buffer.returns[c];
  }
  return b;
}

LossStats ppo_loss(const Batch& batch, const PolicyParams& params, const PPOConfig& cfg,
                   PolicyParams* grad) {
  const auto n = batch.obs.cols();
  if (n == 0) {
    throw std::invalid_argument("ppo_loss: empty batch");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  PolicyEval eval = policy_forward(params, batch.obs, grad != nullptr);

  const Eigen::ArrayXd sigma = params.log_std.col(0).array().exp();
  const Eigen::ArrayXXd z =
      (batch.actions - eval.mean).array().colwise() / sigma;
  const double log_norm = params.log_std.sum() + 0.5 * kLog2Pi * static_cast<double>(sigma.size());
  const Eigen::ArrayXd logp = -0.5 * z.square().colwise().sum().transpose() - log_norm;

  Eigen::ArrayXd adv = batch.advantages.array();
  if (n > 1) {
    const double mu = adv.mean();
    const double sd = std::sqrt((adv - mu).square().mean());
    adv = (adv - mu) / (sd + 1e-8);
  }

  const Eigen::ArrayXd ratio = (logp - batch.logp_old.array()).exp();
  const double lo = 1.0 - cfg.clip;
  const double hi = 1.0 + cfg.clip;
  Eigen::ArrayXd dsurr(n);  // d min(...) / d logp
  double surr_sum = 0.0;
  double clipped = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double unclipped = ratio[i] * adv[i];
    const double bounded = std::clamp(ratio[i], lo, hi) * adv[i];
    surr_sum += std::min(unclipped, bounded);
    const bool active = adv[i] >= 0.0 ? ratio[i] <= hi : ratio[i] >= lo;
    dsurr[i] = active ? unclipped : 0.0;
    clipped += (ratio[i] < lo || ratio[i] > hi) ? 1.0 : 0.0;
  }

  const Eigen::ArrayXd verr = eval.value.row(0).transpose().array() - batch.returns.array();
  const double entropy = (0.5 * (kLog2Pi + 1.0) + params.log_std.col(0).array()).sum();

  LossStats s;
  s.surrogate = -surr_sum * inv_n;
  s.value = verr.square().mean();
  s.entropy = entropy;
  s.loss = s.surrogate + cfg.value_coef * s.value - cfg.entropy_coef * s.entropy;
  s.approx_kl = (batch.logp_old.array() - logp).mean();
  s.clip_fraction = clipped * inv_n;

  if (grad) {
    const Eigen::ArrayXd dlogp = -dsurr * inv_n;
    Matrix dmean = (z.colwise() / sigma).matrix();
    dmean.array().rowwise() *= dlogp.transpose();
    Matrix dvalue = (2.0 * cfg.value_coef * inv_n * verr).matrix().transpose();

    const Mlp ga = mlp_backward(params.actor, eval.actor_cache, dmean);
    const Mlp gc = mlp_backward(params.critic, eval.critic_cache, dvalue);
    grad->actor = ga;
    grad->critic = gc;
    grad->log_std =
        ((z.square() - 1.0).matrix() * dlogp.matrix()).array() - cfg.entropy_coef;
  }
  return s;
}

double clip_grad_norm(PolicyParams& grad, double max_norm) {
  const double norm = std::sqrt(squared_norm(grad));
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for_each_tensor(grad, [&](const std::string&, Matrix& m) { m *= scale; });
  }
  return norm;
}

Optimizer::Optimizer(const PPOConfig& cfg, const PolicyParams& shape)
    : kind_(cfg.optimizer),
      lr_(cfg.learning_rate),
      beta1_(cfg.adam_beta1),
      beta2_(cfg.adam_beta2),
      eps_(cfg.adam_epsilon),
      m_(zeros_like(shape)),
      v_(zeros_like(shape)) {}

void Optimizer::apply(PolicyParams& params, const PolicyParams& grad) {
  ++steps_;
  std::vector<Matrix*> p;
  std::vector<const Matrix*> g;
  for_each_tensor(params, [&](const std::string&, Matrix& m) { p.push_back(&m); });
  for_each_tensor(grad, [&](const std::string&, const Matrix& m) { g.push_back(&m); });
  if (kind_ == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      *p[i] -= lr_ * *g[i];
    }
    return;
  }
  std::vector<Matrix*> m;
  std::vector<Matrix*> v;
  for_each_tensor(m_, [&](const std::string&, Matrix& x) { m.push_back(&x); });
  for_each_tensor(v_, [&](const std::string&, Matrix& x) { v.push_back(&x); });
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < p.size(); ++i) {
    *m[i] = beta1_ * *m[i] + (1.0 - beta1_) * *g[i];
    *v[i] = beta2_ * *v[i] + (1.0 - beta2_) * g[i]->cwiseProduct(*g[i]);
    p[i]->array() -= lr_ * (m[i]->array() / c1) / ((v[i]->array() / c2).sqrt() + eps_);
  }
}

UpdateStats ppo_update(const RolloutBuffer& buffer, PolicyParams& params, Optimizer& optimizer,
                       const PPOConfig& cfg, Rng& rng) {
  validate(cfg);
  const int n = buffer.size();
  if (n < cfg.minibatches) {
    throw std::invalid_argument("ppo_update: buffer smaller than the minibatch count");
  }
  const PolicyParams backup = params;
  const Optimizer optimizer_backup = optimizer;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  UpdateStats stats;
  int steps = 0;
  PolicyParams grad = zeros_like(params);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      const int begin = static_cast<int>(static_cast<long>(n) * mb / cfg.minibatches);
      const int end = static_cast<int>(static_cast<long>(n) * (mb + 1) / cfg.minibatches);
      const std::vector<int> cols(order.begin() + begin, order.begin() + end);
      const LossStats ls = ppo_loss(gather(buffer, cols), params, cfg, &grad);
      const double norm = clip_grad_norm(grad, cfg.max_grad_norm);
      if (!std::isfinite(norm) || !std::isfinite(ls.loss)) {
        params = backup;
        optimizer = optimizer_backup;
        throw DivergenceError("non-finite gradient in ppo_update");
      }
      optimizer.apply(params, grad);
      stats.loss += ls.loss;
      stats.surrogate += ls.surrogate;
      stats.value += ls.value;
      stats.entropy += ls.entropy;
      stats.approx_kl += ls.approx_kl;
      stats.clip_fraction += ls.clip_fraction;
      stats.grad_norm += norm;
      ++steps;
    }
  }
  const double inv = 1.0 / steps;
  stats.loss *= inv;
  stats.surrogate *= inv;
  stats.value *= inv;
  stats.entropy *= inv;
  stats.approx_kl *= inv;
  stats.clip_fraction *= inv;
  stats.grad_norm *= inv;
  stats.policy_noise = policy_noise(params);
  return stats;
}

}  // namespace sparsewalk::learn
