#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "drm/field.hpp"
#include "drm/pde.hpp"

namespace drm {

/// Nodal values on the uniform grid x_k = k / K, k = 0..K.
struct GridFunction1D {
  int K = 16;
  Vector values;  // K + 1

  double h() const noexcept { return 1.0 / K; }
  double node(int k) const noexcept { return static_cast<double>(k) / K; }

  /// Four-point cubic interpolation and its derivative.
  double value(double x) const;
  double derivative(double x) const;
  /// One-sided fourth-order difference at x = 0 (side 0) or x = 1 (side 1).
  double endpoint_derivative(int side) const;

  Field as_field() const;
};

/// Thomas algorithm; throws SolverFailureError on a zero pivot.
Vector solve_tridiagonal(const Vector& sub, const Vector& diag, const Vector& sup, const Vector& rhs);

/// -u'' + w u = f, u(0) = u(1) = 0, second-order centred differences.
GridFunction1D solve_dirichlet_1d(const PdeProblem& prob, int K);
/// Same equation with (1/lambda) du/dn + u = 0 at both ends (ghost-node elimination).
GridFunction1D solve_robin_1d(const PdeProblem& prob, double lambda, int K);

/// (4 u_{2K} - u_K) / 3 on the K grid.
GridFunction1D richardson(const GridFunction1D& coarse, const GridFunction1D& fine);
GridFunction1D solve_dirichlet_1d_extrapolated(const PdeProblem& prob, int K);
GridFunction1D solve_robin_1d_extrapolated(const PdeProblem& prob, double lambda, int K);

/// R_lambda(v) = 1/2 a(u* - v, u* - v) + lambda/2 int over the boundary of
/// (-(1/lambda) du*/dn - v)^2, with lambda = prob.lambda. Uses the exact
/// solution when the problem has one and a K = 4096 Dirichlet solve otherwise.
double r_lambda(const Field& v, const PdeProblem& prob, const CubeQuadrature& quad);

struct PenaltyRow {
  double lambda = 0.0;
  double h1_error = 0.0;     // |u_lambda - u*|_{H^1}
  double boundary_l2 = 0.0;  // |u_lambda - u*|_{L^2(boundary)}
  double r_lambda = 0.0;     // R_lambda(u_lambda)
};

struct PenaltyStudy {
  std::vector<PenaltyRow> rows;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Robin-vs-Dirichlet H^1 distance over a geometric lambda sequence, with a
/// least-squares fit of log error against log lambda.
PenaltyStudy penalty_rate_study(const PdeProblem& prob, std::span<const double> lambdas, int K,
                                const CubeQuadrature& quad);

void write_penalty_csv(std::ostream& out, const PenaltyStudy& s);
nlohmann::json penalty_summary_json(const PenaltyStudy& s);

/// Least-squares line through (x_k, y_k): returns slope, intercept, R^2.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace drm
