#include "dgcca/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dgcca/rng.hpp"

namespace dgcca {

Activation activation_from_name(std::string_view name) {
  if (name == "identity") return Activation::identity;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

std::string_view activation_name(Activation activation) {
  switch (activation) {
    case Activation::identity: return "identity";
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  throw std::invalid_argument("unknown activation value");
}

namespace {

void check_widths(const std::vector<Index>& widths) {
  if (widths.size() < 2) {
    throw std::invalid_argument("network: need at least input and output widths");
  }
  for (Index w : widths) {
    if (w < 1) throw std::invalid_argument("network: layer widths must be >= 1");
  }
}

Matrix apply_activation(Activation activation, const Matrix& z) {
  switch (activation) {
    case Activation::identity: return z;
    case Activation::sigmoid:
      return ((-z.array()).exp() + 1.0).inverse().matrix();
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
  }
  throw std::invalid_argument("unknown activation value");
}

// Derivative expressed through the stored trace: sigmoid and tanh from the
// activation value, relu from the sign of the pre-activation (0 at z == 0).
Matrix activation_derivative(Activation activation, const Matrix& pre,
                             const Matrix& act) {
  switch (activation) {
    case Activation::identity: return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::sigmoid: return (act.array() * (1.0 - act.array())).matrix();
    case Activation::relu:
      return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - act.array().square()).matrix();
  }
  throw std::invalid_argument("unknown activation value");
}

}  // namespace

MlpNetwork init_network(const std::vector<Index>& widths, Activation activation,
                        std::uint64_t seed) {
  check_widths(widths);
  Rng rng(seed);
  MlpNetwork net;
  net.layer_widths = widths;
  net.hidden_activation = activation;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    const Index fan_in = widths[k];
    const Index fan_out = widths[k + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (Index i = 0; i < fan_out; ++i) {
      for (Index j = 0; j < fan_in; ++j) {
        w(i, j) = rng.uniform(-bound, bound);
      }
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Vector::Zero(fan_out));
  }
  return net;
}

MlpNetwork identity_network(const std::vector<Index>& widths, Activation activation) {
  check_widths(widths);
  for (Index w : widths) {
    if (w != widths[0]) {
      throw std::invalid_argument("identity_network: all widths must be equal");
    }
  }
  MlpNetwork net;
  net.layer_widths = widths;
  net.hidden_activation = activation;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    net.weights.push_back(Matrix::Identity(widths[0], widths[0]));
    net.biases.push_back(Vector::Zero(widths[0]));
  }
  return net;
}

void validate(const MlpNetwork& net) {
  check_widths(net.layer_widths);
  const std::size_t k = net.layer_widths.size() - 1;
  if (net.weights.size() != k || net.biases.size() != k) {
    throw std::invalid_argument("network: layer count mismatch");
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (net.weights[i].rows() != net.layer_widths[i + 1] ||
        net.weights[i].cols() != net.layer_widths[i] ||
        net.biases[i].size() != net.layer_widths[i + 1]) {
      throw std::invalid_argument("network: weight shape inconsistent with widths");
    }
    require_finite(net.weights[i], "network weights");
    if (!net.biases[i].allFinite()) {
      throw std::invalid_argument("network biases: non-finite entries");
    }
  }
}

ForwardTrace forward(const MlpNetwork& net, const Matrix& x) {
  if (x.rows() != net.input_width()) {
    throw std::invalid_argument("forward: input has " + std::to_string(x.rows()) +
                                " rows, network expects " +
                                std::to_string(net.input_width()));
  }
  ForwardTrace trace;
  trace.preactivations.reserve(net.depth());
  trace.activations.reserve(net.depth() + 1);
  trace.activations.push_back(x);
  for (std::size_t k = 0; k < net.depth(); ++k) {
    Matrix z = net.weights[k] * trace.activations.back();
    z.colwise() += net.biases[k];
    const bool is_output = k + 1 == net.depth();
    trace.activations.push_back(
        is_output ? z : apply_activation(net.hidden_activation, z));
    trace.preactivations.push_back(std::move(z));
  }
  return trace;
}

ParamGradients backward(const MlpNetwork& net, const ForwardTrace& trace,
                        const Matrix& output_grad, const Regularization& reg) {
  const std::size_t depth = net.depth();
  if (trace.activations.size() != depth + 1 ||
      trace.preactivations.size() != depth) {
    throw std::invalid_argument("backward: trace does not match network depth");
  }
  for (std::size_t k = 0; k < depth; ++k) {
    if (trace.preactivations[k].rows() != net.layer_widths[k + 1]) {
      throw std::invalid_argument("backward: stale trace (layer shape mismatch)");
    }
  }
  if (output_grad.rows() != net.output_width() ||
      output_grad.cols() != trace.output().cols()) {
    throw std::invalid_argument("backward: output gradient shape mismatch");
  }

  ParamGradients grads;
  grads.weights.resize(depth);
  grads.biases.resize(depth);
  Matrix delta = output_grad;  // output layer is linear
  for (std::size_t k = depth; k-- > 0;) {
    grads.weights[k].noalias() = delta * trace.activations[k].transpose();
    if (reg.l1 != 0.0) {
      grads.weights[k] += reg.l1 * net.weights[k].cwiseSign();
    }
    if (reg.l2 != 0.0) {
      grads.weights[k] += reg.l2 * net.weights[k];
    }
    grads.biases[k] = delta.rowwise().sum();
    if (k > 0) {
      delta = (net.weights[k].transpose() * delta)
                  .cwiseProduct(activation_derivative(net.hidden_activation,
                                                      trace.preactivations[k - 1],
                                                      trace.activations[k]));
    }
  }
  return grads;
}

}  // namespace dgcca
