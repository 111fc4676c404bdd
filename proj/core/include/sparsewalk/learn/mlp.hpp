#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sparsewalk/common.hpp"

namespace sparsewalk::learn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fully connected net with tanh hidden layers and a linear output layer.
/// Samples are columns; weights[k] is (out x in), biases[k] is (out x 1).
struct Mlp {
  std::vector<Matrix> weights;
  std::vector<Matrix> biases;

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  /// {input, hidden..., output}
  std::vector<int> sizes() const;
};

/// All-zero net with the given layer sizes (at least input and output).
Mlp make_mlp(const std::vector<int>& sizes);

/// Orthogonal weights with `hidden_gain` on hidden layers and `output_gain` on the last, zero biases.
void init_orthogonal(Mlp& net, Rng& rng, double hidden_gain, double output_gain);

struct MlpCache {
  /// activations[0] is the input, activations[k] the output of layer k.
  std::vector<Matrix> activations;
};

Matrix mlp_forward(const Mlp& net, const Matrix& input, MlpCache* cache = nullptr);

/// Reverse-mode gradients of a loss given dL/d(output). The returned net holds the gradients.
Mlp mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& grad_output,
                 Matrix* grad_input = nullptr);

}  // namespace sparsewalk::learn
