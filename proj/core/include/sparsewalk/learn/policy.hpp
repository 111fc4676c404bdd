#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sparsewalk/learn/mlp.hpp"

namespace sparsewalk::learn {

struct PolicyLayout {
  int obs_dim = 34;
  int action_dim = 8;
  std::vector<int> hidden{128, 256, 128};
  double log_std_init = -0.5108256237659907;  // ln(0.6)

  bool operator==(const PolicyLayout&) const = default;
};

void validate(const PolicyLayout& layout);

/// Actor and critic nets plus a state-independent log standard deviation (action_dim x 1).
struct PolicyParams {
  Mlp actor;
  Mlp critic;
  Matrix log_std;
};

/// Zero weights, log_std at its initial value.
PolicyParams make_zero_policy(const PolicyLayout& layout);
PolicyParams make_policy(const PolicyLayout& layout, Rng& rng);

/// Same shapes as `p`, every entry zero.
PolicyParams zeros_like(const PolicyParams& p);

/// Throws ShapeMismatchError unless `p` has exactly the layout's shapes; std::invalid_argument
/// on non-finite entries.
void check_layout(const PolicyParams& p, const PolicyLayout& layout);

/// Visits every tensor as (name, matrix) in a fixed order:
/// actor.w0, actor.b0, ..., critic.w0, ..., log_std.
template <class P, class F>
void for_each_tensor(P& p, F&& f) {
  for (int k = 0; k < p.actor.num_layers(); ++k) {
    f("actor.w" + std::to_string(k), p.actor.weights[k]);
    f("actor.b" + std::to_string(k), p.actor.biases[k]);
  }
  for (int k = 0; k < p.critic.num_layers(); ++k) {
    f("critic.w" + std::to_string(k), p.critic.weights[k]);
    f("critic.b" + std::to_string(k), p.critic.biases[k]);
  }
  f(std::string("log_std"), p.log_std);
}

double squared_norm(const PolicyParams& p);
std::size_t parameter_count(const PolicyParams& p);

/// Mean of exp(log_std); the policy noise statistic.
double policy_noise(const PolicyParams& p);

struct PolicyEval {
  Matrix mean;   // action_dim x batch
  Matrix value;  // 1 x batch
  MlpCache actor_cache;
  MlpCache critic_cache;
};

PolicyEval policy_forward(const PolicyParams& p, const Matrix& obs, bool keep_cache = false);

/// Log-density and entropy of a diagonal Gaussian for one action.
std::pair<double, double> gaussian_logprob_entropy(const Vector& mean, const Vector& log_std,
                                                   const Vector& action);

}  // namespace sparsewalk::learn
