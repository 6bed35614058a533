#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dgcca/linalg.hpp"

namespace dgcca {

enum class Activation { identity, sigmoid, relu, tanh };

Activation activation_from_name(std::string_view name);
std::string_view activation_name(Activation activation);

/// Feedforward network for one view. Layer k maps width[k] -> width[k+1]
/// through z = W h + b followed by the hidden activation; the output layer
/// is always linear, since GCCA whitening handles the output scale.
struct MlpNetwork {
  std::vector<Index> layer_widths;  // [d, c_1, ..., o]
  std::vector<Matrix> weights;      // K matrices, width[k+1] x width[k]
  std::vector<Vector> biases;       // K vectors
  Activation hidden_activation = Activation::sigmoid;

  std::size_t depth() const { return weights.size(); }
  Index input_width() const { return layer_widths.front(); }
  Index output_width() const { return layer_widths.back(); }
};

/// Glorot-uniform initialization: weights uniform on
/// +-sqrt(6 / (fan_in + fan_out)), biases zero. Deterministic given seed.
MlpNetwork init_network(const std::vector<Index>& widths, Activation activation,
                        std::uint64_t seed);

/// Network whose layers are all identity maps (requires equal widths).
/// Composed with an identity activation it reproduces its input, which
/// reduces DGCCA to linear GCCA.
MlpNetwork identity_network(const std::vector<Index>& widths, Activation activation);

void validate(const MlpNetwork& net);

/// Everything backward needs: per-layer pre-activations and activations for
/// one minibatch. activations[0] is the input; activations.back() is f(x).
struct ForwardTrace {
  std::vector<Matrix> preactivations;  // K
  std::vector<Matrix> activations;     // K + 1

  const Matrix& output() const { return activations.back(); }
};

ForwardTrace forward(const MlpNetwork& net, const Matrix& x);

struct ParamGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

/// L1/L2 penalties on the weight matrices (biases are not penalized):
/// penalty = l1 * sum|w| + (l2 / 2) * sum w^2, so the gradient contribution
/// is l1 * sign(w) + l2 * w, with subgradient 0 at exactly-zero weights.
struct Regularization {
  double l1 = 0.0;
  double l2 = 0.0;
};

/// Chain rule from an externally supplied gradient at the (linear) output
/// layer down to every weight and bias. Does not mutate the network.
ParamGradients backward(const MlpNetwork& net, const ForwardTrace& trace,
                        const Matrix& output_grad, const Regularization& reg = {});

}  // namespace dgcca
