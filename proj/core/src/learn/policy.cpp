#include "sparsewalk/learn/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsewalk::learn {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)

std::vector<int> net_sizes(const PolicyLayout& layout, int out) {
  std::vector<int> sizes{layout.obs_dim};
  sizes.insert(sizes.end(), layout.hidden.begin(), layout.hidden.end());
  sizes.push_back(out);
  return sizes;
}

void check_net(const Mlp& net, const std::vector<int>& expected, const std::string& name) {
  if (net.weights.size() != expected.size() - 1 || net.biases.size() != net.weights.size()) {
    throw ShapeMismatchError(name + " has the wrong number of layers");
  }
  for (std::size_t k = 0; k + 1 < expected.size(); ++k) {
    if (net.weights[k].rows() != expected[k + 1] || net.weights[k].cols() != expected[k] ||
        net.biases[k].rows() != expected[k + 1] || net.biases[k].cols() != 1) {
      throw ShapeMismatchError(name + " layer " + std::to_string(k) + " has shape " +
                               std::to_string(net.weights[k].rows()) + "x" +
                               std::to_string(net.weights[k].cols()) + ", expected " +
                               std::to_string(expected[k + 1]) + "x" +
                               std::to_string(expected[k]));
    }
  }
}

}  // namespace

void validate(const PolicyLayout& layout) {
  if (layout.obs_dim < 1 || layout.action_dim < 1) {
    throw std::invalid_argument("policy dimensions must be positive");
  }
  for (int h : layout.hidden) {
    if (h < 1) {
      throw std::invalid_argument("hidden layer sizes must be positive");
    }
  }
  if (!std::isfinite(layout.log_std_init)) {
    throw std::invalid_argument("log_std_init must be finite");
  }
}

PolicyParams make_zero_policy(const PolicyLayout& layout) {
  validate(layout);
  PolicyParams p;
  p.actor = make_mlp(net_sizes(layout, layout.action_dim));
  p.critic = make_mlp(net_sizes(layout, 1));
  p.log_std = Matrix::Constant(layout.action_dim, 1, layout.log_std_init);
  return p;
}

PolicyParams make_policy(const PolicyLayout& layout, Rng& rng) {
  PolicyParams p = make_zero_policy(layout);
  init_orthogonal(p.actor, rng, std::sqrt(2.0), 0.01);
  init_orthogonal(p.critic, rng, std::sqrt(2.0), 1.0);
  return p;
}

PolicyParams zeros_like(const PolicyParams& p) {
  PolicyParams z = p;
  for_each_tensor(z, [](const std::string&, Matrix& m) { m.setZero(); });
  return z;
}

void check_layout(const PolicyParams& p, const PolicyLayout& layout) {
  check_net(p.actor, net_sizes(layout, layout.action_dim), "actor");
  check_net(p.critic, net_sizes(layout, 1), "critic");
  if (p.log_std.rows() != layout.action_dim || p.log_std.cols() != 1) {
    throw ShapeMismatchError("log_std has the wrong shape");
  }
  bool finite = true;
  for_each_tensor(p, [&](const std::string&, const Matrix& m) { finite = finite && m.allFinite(); });
  if (!finite) {
    throw std::invalid_argument("policy parameters are not finite");
  }
}

double squared_norm(const PolicyParams& p) {
  double total = 0.0;
  for_each_tensor(p, [&](const std::string&, const Matrix& m) { total += m.squaredNorm(); });
  return total;
}

std::size_t parameter_count(const PolicyParams& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

double policy_noise(const PolicyParams& p) { return p.log_std.array().exp().mean(); }

PolicyEval policy_forward(const PolicyParams& p, const Matrix& obs, bool keep_cache) {
  PolicyEval out;
  out.mean = mlp_forward(p.actor, obs, keep_cache ? &out.actor_cache : nullptr);
  out.value = mlp_forward(p.critic, obs, keep_cache ? &out.critic_cache : nullptr);
  return out;
}

std::pair<double, double> gaussian_logprob_entropy(const Vector& mean, const Vector& log_std,
                                                   const Vector& action) {
  if (mean.size() != log_std.size() || mean.size() != action.size()) {
    throw ShapeMismatchError("gaussian arguments differ in size");
  }
  const auto z = (action - mean).array() / log_std.array().exp();
  const double logp = (-0.5 * z.square() - log_std.array() - 0.5 * kLog2Pi).sum();
  const double entropy = (0.5 * (kLog2Pi + 1.0) + log_std.array()).sum();
  return {logp, entropy};
}

}  // namespace sparsewalk::learn
