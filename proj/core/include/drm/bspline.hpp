#pragma once

#include <map>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "drm/field.hpp"
#include "drm/network.hpp"

namespace drm {

/// Order-3 (piecewise quadratic) cardinal B-spline on the dyadic grid 2^-l Z.
struct DyadicSplineIndex {
  int level = 1;
  std::vector<int> multi_index;  // -3 < i_j < 2^l

  int dim() const noexcept { return static_cast<int>(multi_index.size()); }
  void validate() const;
};

/// 2^(2l-1) sum_{j=0..3} (-1)^j C(3,j) (x - (i+j) 2^-l)_+^2, exactly 0 off
/// the support [i 2^-l, (i+3) 2^-l].
double eval_univariate(int level, int i, double x);
double eval_univariate_derivative(int level, int i, double x);

double eval_multivariate(const DyadicSplineIndex& idx, std::span<const double> x);
Vector gradient_multivariate(const DyadicSplineIndex& idx, std::span<const double> x);

/// Number of admissible indices per axis, 2^l + 2.
int basis_size_1d(int level);

struct SplineCombination {
  int level = 1;
  int dim = 1;
  std::map<std::vector<int>, double> coeffs;

  void validate() const;
  double eval(std::span<const double> x) const;
  Field as_field() const;
};

/// ReLU^2 network for one tensor-product spline: a first layer of 4d units
/// followed by a binary tree of product gadgets.
Network compile_to_network(const DyadicSplineIndex& idx);

/// Parallel sum of compiled terms; the empty combination gives the zero network.
Network compile_combination(const SplineCombination& c);

struct FitOptions {
  int points_per_interval = 6;
};

struct H1Fit {
  SplineCombination spline;
  /// Discrete H^1 error between target and fit on the fitting grid.
  double residual = 0.0;
};

/// Least-squares fit in the discrete H^1 norm over the full level-l basis,
/// using tensor Gauss-Legendre nodes aligned with the knots.
H1Fit fit_h1(const Field& target, int level, int d, const FitOptions& opts = {});

/// 4d * max(1, ceil(C c2 / eps - 4))^d
double approximation_width(double eps, double c2, int d, double constant = 1.0);

nlohmann::json spline_to_json(const SplineCombination& c);
SplineCombination spline_from_json(const nlohmann::json& j);

}  // namespace drm
