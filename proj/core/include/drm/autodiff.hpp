#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "drm/linalg.hpp"

namespace drm::ad {

/// Handle to a node on a Tape.
struct Var {
  std::uint32_t id = 0;
};

/// Reverse-mode tape over matrix-valued nodes.
///
/// Nodes are appended in evaluation order, so the list is always
/// topologically sorted. A tape is single-use: record, call backward() once,
/// read adjoints. Batches live in the column dimension, which keeps the node
/// count independent of batch size.
class Tape {
 public:
  enum class Op : std::uint8_t { Leaf, Affine, ReluPower, Sum, Scale, Product, Square, Reduce };

  Var constant(Matrix value);
  /// A leaf whose adjoint is wanted.
  Var parameter(Matrix value);

  /// weights * input, optionally + bias broadcast over columns.
  Var affine(Var weights, Var input);
  Var affine(Var weights, Var input, Var bias);
  /// max(x, 0)^alpha elementwise, alpha in {1, 2}.
  Var relu_power(Var x, int alpha);
  /// a + beta * b
  Var sum(Var a, Var b, double beta = 1.0);
  Var scale(Var a, double factor);
  /// Elementwise (Hadamard) product.
  Var product(Var a, Var b);
  Var square(Var a);
  /// 1x1 node: sum_ij weights_ij * a_ij.
  Var reduce(Var a, Matrix weights);
  /// 1x1 node: weight * sum_ij a_ij.
  Var reduce(Var a, double weight);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;

  /// Accumulate d(root)/d(node) for every node that depends on a parameter.
  /// The root must be 1x1.
  void backward(Var root);

  /// Adjoint of a node after backward(); zero matrix for constants.
  const Matrix& adjoint(Var v) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  Op op(Var v) const { return nodes_.at(v.id).op; }

 private:
  struct Node {
    Op op = Op::Leaf;
    bool needs_grad = false;
    std::uint32_t in[3] = {0, 0, 0};
    std::uint8_t arity = 0;
    double param = 0.0;
    Matrix value;
    Matrix aux;
    Matrix adjoint;
  };

  Var push(Node node, const char* name);
  bool needs(std::initializer_list<Var> vs) const;
  void accumulate(std::uint32_t id, const Matrix& contribution);

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

/// Parameters of a computation, e.g. [A_1, b_1, A_2, b_2, ...].
using ParameterSet = std::vector<Matrix>;

/// Records a scalar loss on the tape given leaf handles for the parameters.
/// Batch inputs are captured by the callable.
using ParametricLoss = std::function<Var(Tape&, std::span<const Var>)>;

struct ValueAndGradient {
  double value = 0.0;
  ParameterSet gradient;
};

/// d loss / d params by one forward recording and one reverse sweep.
ValueAndGradient grad_params(const ParametricLoss& loss, const ParameterSet& params);

/// Flatten / unflatten helpers shared by optimizers and finite-difference checks.
std::size_t parameter_count(const ParameterSet& params);
Vector flatten(const ParameterSet& params);
ParameterSet unflatten(const Vector& flat, const ParameterSet& shape);

}  // namespace drm::ad
