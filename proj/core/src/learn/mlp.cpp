#include "sparsewalk/learn/mlp.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparsewalk::learn {

std::vector<int> Mlp::sizes() const {
  std::vector<int> out{input_dim()};
  for (const auto& w : weights) {
    out.push_back(static_cast<int>(w.rows()));
  }
  return out;
}

Mlp make_mlp(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("an MLP needs at least input and output sizes");
  }
  Mlp net;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k - 1] < 1 || sizes[k] < 1) {
      throw std::invalid_argument("layer sizes must be positive");
    }
    net.weights.push_back(Matrix::Zero(sizes[k], sizes[k - 1]));
    net.biases.push_back(Matrix::Zero(sizes[k], 1));
  }
  return net;
}

namespace {

Matrix orthogonal(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool tall = rows >= cols;
  const int r = tall ? rows : cols;
  const int c = tall ? cols : rows;
  Matrix a(r, c);
  for (int j = 0; j < c; ++j) {
    for (int i = 0; i < r; ++i) {
      a(i, j) = normal(rng);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(r, c);
  const Matrix rr = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j) {
    if (rr(j, j) < 0) {
      q.col(j) *= -1.0;
    }
  }
  return tall ? q : Matrix(q.transpose());
}

// Eigen evaluates std::tanh on doubles one scalar at a time; this form vectorizes.
void tanh_inplace(Matrix& x) {
  constexpr Eigen::Index kBlock = 512;
  Eigen::Array<double, kBlock, 1> e;
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; i += kBlock) {
    const Eigen::Index m = std::min(kBlock, n - i);
    auto a = Eigen::Map<Eigen::ArrayXd>(x.data() + i, m);
    auto em = e.head(m);
    em = (2.0 * a.max(-20.0).min(20.0)).exp();
    a = (a.abs() < 1e-3)
            .select(a * (1.0 + a.square() * (-1.0 / 3.0 + a.square() * (2.0 / 15.0))),
                    (em - 1.0) / (em + 1.0));
  }
}

}  // namespace

void init_orthogonal(Mlp& net, Rng& rng, double hidden_gain, double output_gain) {
  for (int k = 0; k < net.num_layers(); ++k) {
    const double gain = k + 1 == net.num_layers() ? output_gain : hidden_gain;
    auto& w = net.weights[k];
    w = gain * orthogonal(static_cast<int>(w.rows()), static_cast<int>(w.cols()), rng);
    net.biases[k].setZero();
  }
}

Matrix mlp_forward(const Mlp& net, const Matrix& input, MlpCache* cache) {
  if (input.rows() != net.input_dim()) {
    throw ShapeMismatchError("mlp input has " + std::to_string(input.rows()) +
                             " rows, expected " + std::to_string(net.input_dim()));
  }
  std::vector<Matrix> local;
  std::vector<Matrix>& acts = cache ? cache->activations : local;
  acts.resize(static_cast<std::size_t>(net.num_layers()) + 1);
  acts[0] = input;
  for (int k = 0; k < net.num_layers(); ++k) {
    Matrix& y = acts[k + 1];
    y.resize(net.weights[k].rows(), input.cols());
    y.noalias() = net.weights[k] * acts[k];
    y.colwise() += net.biases[k].col(0);
    if (k + 1 < net.num_layers()) {
      tanh_inplace(y);
    }
    if (!cache && k > 0) {
      acts[k].resize(0, 0);
    }
  }
  if (cache) {
    return acts.back();
  }
  return std::move(acts.back());
}

Mlp mlp_backward(const Mlp& net, const MlpCache& cache, const Matrix& grad_output,
                 Matrix* grad_input) {
  const int layers = net.num_layers();
  if (static_cast<int>(cache.activations.size()) != layers + 1) {
    throw std::invalid_argument("cache does not match the network");
  }
  Mlp grad;
  grad.weights.resize(layers);
  grad.biases.resize(layers);
  Matrix delta = grad_output;
  for (int k = layers - 1; k >= 0; --k) {
    const Matrix& a_in = cache.activations[k];
    grad.weights[k].noalias() = delta * a_in.transpose();
    grad.biases[k] = delta.rowwise().sum();
    if (k > 0 || grad_input) {
      Matrix back;
      back.noalias() = net.weights[k].transpose() * delta;
      if (k > 0) {
        delta.resize(back.rows(), back.cols());
        delta.array() = back.array() * (1.0 - a_in.array().square());
      } else {
        *grad_input = std::move(back);
      }
    }
  }
  return grad;
}

}  // namespace sparsewalk::learn
