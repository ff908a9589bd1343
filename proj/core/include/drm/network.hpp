#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "drm/autodiff.hpp"
#include "drm/linalg.hpp"

namespace drm {

/// Unit activation. Relu and Relu2 are ReLU^alpha with alpha = 1, 2.
enum class Activation : std::uint8_t { Identity, Relu, Relu2 };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Relu2: return z > 0.0 ? z * z : 0.0;
  }
  return z;
}

/// Derivative with the right-derivative convention at the kink (slope 0 at z = 0).
inline double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::Relu2: return z > 0.0 ? 2.0 * z : 0.0;
  }
  return 1.0;
}

/// One affine map followed by a per-unit activation.
///
/// Most layers use a single activation for every unit. The derivative and
/// gradient-norm constructions mix ReLU and ReLU^2 units inside one layer,
/// so the activation is stored per unit.
struct Layer {
  Matrix weights;  // out_dim x in_dim
  Vector bias;     // out_dim
  std::vector<Activation> activations;

  Layer() = default;
  Layer(Matrix w, Vector b, Activation a);
  Layer(Matrix w, Vector b, std::vector<Activation> acts);

  Eigen::Index in_dim() const noexcept { return weights.cols(); }
  Eigen::Index out_dim() const noexcept { return weights.rows(); }

  /// The shared activation, if every unit uses the same one.
  std::optional<Activation> uniform_activation() const;
  bool uses(Activation a) const;

  /// Applies the layer to a batch of column vectors.
  Matrix apply(const Matrix& input) const;
};

/// Scalar-valued multilayer network u: R^d -> R.
///
/// depth() is the number of layers (hidden layers plus the affine output);
/// width() is the largest layer output size.
class Network {
 public:
  Network(int input_dim, std::vector<Layer> layers);

  int input_dim() const noexcept { return input_dim_; }
  int depth() const noexcept { return static_cast<int>(layers_.size()); }
  int width() const noexcept;
  std::size_t parameter_count() const noexcept;
  const std::vector<Layer>& layers() const noexcept { return layers_; }

  /// True when every hidden unit is ReLU^2.
  bool relu2_hidden() const noexcept;

  double forward(std::span<const double> x) const;
  /// Values at the columns of `points` (input_dim x n).
  Vector forward(const PointSet& points) const;

  /// [A_1, b_1, ..., A_L, b_L]
  ad::ParameterSet parameters() const;
  Network with_parameters(const ad::ParameterSet& params) const;

 private:
  int input_dim_;
  std::vector<Layer> layers_;
};

/// Values and input gradients of a network on a batch.
struct NetworkJet {
  Vector value;     // n
  Matrix gradient;  // d x n
};

/// Evaluates u and grad u by propagating input tangents layer by layer
/// (D_i h_k = sigma'(z_k) * A_k D_i h_{k-1}).
NetworkJet evaluate_with_gradient(const Network& net, const PointSet& points);

/// Parameter description of N^alpha_{D,W,B}.
struct FunctionClassSpec {
  int depth = 1;
  int width = 1;
  double bound = 1.0;
  std::set<int> activation_index = {2};
  std::optional<std::vector<int>> layer_widths;

  /// Layer output sizes including the scalar output layer.
  std::vector<int> resolved_widths() const;
  void validate() const;
};

/// Glorot-uniform weights on [-sqrt(6/(fan_in+fan_out)), +...], zero biases.
Network random_init(const FunctionClassSpec& spec, int input_dim, std::uint64_t seed);

/// Two-input network computing x*y with one ReLU^2 layer of four units.
Network product_gadget();
/// One-input network computing x^2 as relu2(x) + relu2(-x).
Network square_gadget();

/// ReLU/ReLU^2 network computing du/dx_i (i zero-based).
///
/// Depth is net.depth() + 2 and width at most (net.depth() + 2) * net.width().
/// Requires ReLU^2 hidden units; throws ConstructionError otherwise.
Network build_derivative_network(const Network& net, int coordinate);

/// ReLU/ReLU^2 network computing |grad u|^2, depth net.depth() + 3 and width at
/// most d * (net.depth() + 2) * net.width().
Network build_gradnorm_network(const Network& net);

/// Network whose output is sum_k scale_k * nets[k](x); every member must have
/// the same input dimension and depth.
Network parallel_sum(std::span<const Network> nets, std::span<const double> scales);

}  // namespace drm
