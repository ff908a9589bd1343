#pragma once

#include "drm/linalg.hpp"

namespace drm {

/// Nodes (column-wise) and positive weights.
struct QuadratureRule {
  PointSet points;
  Vector weights;

  Eigen::Index size() const noexcept { return weights.size(); }
  int dim() const noexcept { return static_cast<int>(points.rows()); }
};

/// q-point Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(int q, double a = 0.0, double b = 1.0);

/// Composite rule on [0, 1]: `cells` equal cells with q points each.
QuadratureRule composite_gauss_legendre(int q, int cells);

/// Tensor product of a one-dimensional rule with itself d times.
/// The first coordinate varies fastest.
QuadratureRule tensor_rule(const QuadratureRule& rule_1d, int d);

/// Interior and boundary rules for [0,1]^d.
///
/// Interior weights sum to 1; boundary weights sum to 2d (one unit per face).
/// boundary_normals holds the outward unit normal at every boundary node.
struct CubeQuadrature {
  int dim = 1;
  int order = 8;
  int cells = 32;
  QuadratureRule interior;
  QuadratureRule boundary;
  Matrix boundary_normals;

  /// cells <= 0 selects the default: 32 for d <= 2, 8 for d = 3, 4 above.
  static CubeQuadrature make(int d, int q = 8, int cells = 0);
};

}  // namespace drm
