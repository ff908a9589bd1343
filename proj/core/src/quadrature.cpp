#include "drm/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "drm/errors.hpp"

namespace drm {

QuadratureRule gauss_legendre(int q, double a, double b) {
  if (q < 1) throw DomainError("gauss_legendre: q must be >= 1");
  QuadratureRule r{PointSet(1, q), Vector(q)};
  // Newton iteration on P_q from the Chebyshev-like initial guess.
  for (int k = 0; k < (q + 1) / 2; ++k) {
    double x = std::cos(std::numbers::pi * (k + 0.75) / (q + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int n = 2; n <= q; ++n) {
        const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = q * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int n = 2; n <= q; ++n) {
      const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
      p0 = p1;
      p1 = p2;
    }
    dp = q * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.points(0, k) = -x;
    r.points(0, q - 1 - k) = x;
    r.weights(k) = w;
    r.weights(q - 1 - k) = w;
  }
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  r.points = (r.points.array() * half + mid).matrix();
  r.weights *= half;
  return r;
}

QuadratureRule composite_gauss_legendre(int q, int cells) {
  if (cells < 1) throw DomainError("composite_gauss_legendre: cells must be >= 1");
  const QuadratureRule ref = gauss_legendre(q, 0.0, 1.0);
  QuadratureRule r{PointSet(1, q * cells), Vector(q * cells)};
  const double h = 1.0 / cells;
  for (int c = 0; c < cells; ++c) {
    for (int k = 0; k < q; ++k) {
      r.points(0, c * q + k) = (c + ref.points(0, k)) * h;
      r.weights(c * q + k) = ref.weights(k) * h;
    }
  }
  return r;
}

QuadratureRule tensor_rule(const QuadratureRule& rule_1d, int d) {
  if (d < 1) throw DomainError("tensor_rule: d must be >= 1");
  if (rule_1d.dim() != 1) throw ShapeError("tensor_rule: expected a one-dimensional rule");
  const Eigen::Index m = rule_1d.size();
  Eigen::Index total = 1;
  for (int j = 0; j < d; ++j) total *= m;
  QuadratureRule r{PointSet(d, total), Vector(total)};
  for (Eigen::Index k = 0; k < total; ++k) {
    Eigen::Index rest = k;
    double w = 1.0;
    for (int j = 0; j < d; ++j) {
      const Eigen::Index i = rest % m;
      rest /= m;
      r.points(j, k) = rule_1d.points(0, i);
      w *= rule_1d.weights(i);
    }
    r.weights(k) = w;
  }
  return r;
}

CubeQuadrature CubeQuadrature::make(int d, int q, int cells) {
  if (d < 1) throw DomainError("cube quadrature: d must be >= 1");
  if (cells <= 0) cells = d <= 2 ? 32 : (d == 3 ? 8 : 4);
  CubeQuadrature c;
  c.dim = d;
  c.order = q;
  c.cells = cells;
  const QuadratureRule line = composite_gauss_legendre(q, cells);
  c.interior = tensor_rule(line, d);

  if (d == 1) {
    c.boundary = QuadratureRule{PointSet(1, 2), Vector::Ones(2)};
    c.boundary.points << 0.0, 1.0;
    c.boundary_normals = Matrix(1, 2);
    c.boundary_normals << -1.0, 1.0;
    return c;
  }
  const QuadratureRule face = tensor_rule(line, d - 1);
  const Eigen::Index nf = face.size();
  c.boundary = QuadratureRule{PointSet(d, 2 * d * nf), Vector(2 * d * nf)};
  c.boundary_normals = Matrix::Zero(d, 2 * d * nf);
  for (int axis = 0; axis < d; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const Eigen::Index base = (2 * axis + side) * nf;
      for (Eigen::Index k = 0; k < nf; ++k) {
        int src = 0;
        for (int j = 0; j < d; ++j) {
          c.boundary.points(j, base + k) = (j == axis) ? side : face.points(src++, k);
        }
        c.boundary.weights(base + k) = face.weights(k);
        c.boundary_normals(axis, base + k) = side ? 1.0 : -1.0;
      }
    }
  }
  return c;
}

}  // namespace drm
