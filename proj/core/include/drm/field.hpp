#pragma once

#include <functional>

#include "drm/linalg.hpp"
#include "drm/network.hpp"

namespace drm {

/// Values and gradients of a function on a batch of points.
struct FieldValues {
  Vector value;     // n
  Matrix gradient;  // d x n
};

/// A function u: [0,1]^d -> R together with its gradient, evaluated in batches.
using Field = std::function<FieldValues(const PointSet&)>;

/// A coefficient or source term evaluated in batches.
using ScalarField = std::function<Vector(const PointSet&)>;

using PointValue = std::function<double(const Eigen::Ref<const Vector>&)>;
using PointGradient = std::function<Vector(const Eigen::Ref<const Vector>&)>;

inline Field pointwise_field(PointValue value, PointGradient gradient) {
  return [value = std::move(value), gradient = std::move(gradient)](const PointSet& x) {
    FieldValues out{Vector(x.cols()), Matrix(x.rows(), x.cols())};
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      out.value(k) = value(x.col(k));
      out.gradient.col(k) = gradient(x.col(k));
    }
    return out;
  };
}

inline ScalarField pointwise_scalar(PointValue value) {
  return [value = std::move(value)](const PointSet& x) {
    Vector out(x.cols());
    for (Eigen::Index k = 0; k < x.cols(); ++k) out(k) = value(x.col(k));
    return out;
  };
}

inline ScalarField constant_scalar(double c) {
  return [c](const PointSet& x) { return Vector::Constant(x.cols(), c); };
}

inline Field constant_field(double c) {
  return [c](const PointSet& x) {
    return FieldValues{Vector::Constant(x.cols(), c), Matrix::Zero(x.rows(), x.cols())};
  };
}

inline Field network_field(Network net) {
  return [net = std::move(net)](const PointSet& x) {
    NetworkJet jet = evaluate_with_gradient(net, x);
    return FieldValues{std::move(jet.value), std::move(jet.gradient)};
  };
}

/// alpha * a + beta * b
inline Field combine(Field a, double alpha, Field b, double beta) {
  return [a = std::move(a), b = std::move(b), alpha, beta](const PointSet& x) {
    FieldValues u = a(x);
    FieldValues v = b(x);
    return FieldValues{alpha * u.value + beta * v.value, alpha * u.gradient + beta * v.gradient};
  };
}

}  // namespace drm
