#include "drm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "drm/energy.hpp"
#include "drm/errors.hpp"

namespace drm {

// ---------------------------------------------------------------- grid functions

namespace {

int stencil_start(double x, int K) {
  const int k = static_cast<int>(std::floor(x * K)) - 1;
  return std::clamp(k, 0, K - 3);
}

}  // namespace

double GridFunction1D::value(double x) const {
  const int k0 = stencil_start(x, K);
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double l = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a) l *= (x - node(k0 + b)) / (node(k0 + a) - node(k0 + b));
    }
    s += values(k0 + a) * l;
  }
  return s;
}

double GridFunction1D::derivative(double x) const {
  const int k0 = stencil_start(x, K);
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double denom = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a) denom *= node(k0 + a) - node(k0 + b);
    }
    double num = 0.0;
    for (int c = 0; c < 4; ++c) {
      if (c == a) continue;
      double p = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (b != a && b != c) p *= x - node(k0 + b);
      }
      num += p;
    }
    s += values(k0 + a) * num / denom;
  }
  return s;
}

double GridFunction1D::endpoint_derivative(int side) const {
  const double c[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
  double s = 0.0;
  if (side == 0) {
    for (int k = 0; k < 5; ++k) s += c[k] * values(k);
    return s / (12.0 * h());
  }
  for (int k = 0; k < 5; ++k) s += c[k] * values(K - k);
  return -s / (12.0 * h());
}

Field GridFunction1D::as_field() const {
  return [g = *this](const PointSet& x) {
    if (x.rows() != 1) throw ShapeError("grid function: one-dimensional points expected");
    FieldValues out{Vector(x.cols()), Matrix(1, x.cols())};
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      out.value(k) = g.value(x(0, k));
      out.gradient(0, k) = g.derivative(x(0, k));
    }
    return out;
  };
}

// ---------------------------------------------------------------- solvers

Vector solve_tridiagonal(const Vector& sub, const Vector& diag, const Vector& sup, const Vector& rhs) {
  const Eigen::Index n = diag.size();
  if (sub.size() != n || sup.size() != n || rhs.size() != n) throw ShapeError("tridiagonal: size mismatch");
  Vector c(n), d(n);
  double pivot = diag(0);
  if (pivot == 0.0) throw SolverFailureError("tridiagonal: zero pivot");
  c(0) = sup(0) / pivot;
  d(0) = rhs(0) / pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    pivot = diag(i) - sub(i) * c(i - 1);
    if (pivot == 0.0 || !std::isfinite(pivot)) throw SolverFailureError("tridiagonal: zero pivot");
    c(i) = sup(i) / pivot;
    d(i) = (rhs(i) - sub(i) * d(i - 1)) / pivot;
  }
  Vector x(n);
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 1; i-- > 0;) x(i) = d(i) - c(i) * x(i + 1);
  return x;
}

namespace {

void check_oracle_problem(const PdeProblem& prob, int K) {
  if (prob.dim != 1) throw DomainError("oracle: only d = 1 is supported");
  if (K < 16) throw DomainError("oracle: K must be >= 16");
  if (prob.c1 < 0.0) throw DomainError("oracle: w must be non-negative");
}

PointSet grid_points(int K) {
  PointSet x(1, K + 1);
  for (int k = 0; k <= K; ++k) x(0, k) = static_cast<double>(k) / K;
  return x;
}

}  // namespace

GridFunction1D solve_dirichlet_1d(const PdeProblem& prob, int K) {
  check_oracle_problem(prob, K);
  const PointSet x = grid_points(K);
  const Vector w = prob.w(x);
  const Vector f = prob.f(x);
  const double h2 = 1.0 / (static_cast<double>(K) * K);
  const Eigen::Index n = K - 1;
  Vector sub = Vector::Constant(n, -1.0 / h2), sup = Vector::Constant(n, -1.0 / h2);
  sub(0) = 0.0;
  sup(n - 1) = 0.0;
  const Vector diag = (2.0 / h2 + w.segment(1, n).array()).matrix();
  const Vector inner = solve_tridiagonal(sub, diag, sup, f.segment(1, n));
  GridFunction1D g{K, Vector::Zero(K + 1)};
  g.values.segment(1, n) = inner;
  return g;
}

GridFunction1D solve_robin_1d(const PdeProblem& prob, double lambda, int K) {
  check_oracle_problem(prob, K);
  if (!(lambda > 0.0)) throw DomainError("oracle: lambda must be positive");
  const PointSet x = grid_points(K);
  const Vector w = prob.w(x);
  const Vector f = prob.f(x);
  const double h = 1.0 / K;
  const double h2 = h * h;
  const Eigen::Index n = K + 1;
  Vector sub = Vector::Constant(n, -1.0 / h2), sup = Vector::Constant(n, -1.0 / h2);
  Vector diag = (2.0 / h2 + w.array()).matrix();
  // Ghost nodes: u_{-1} = u_1 - 2 h lambda u_0, and symmetrically at x = 1.
  sub(0) = 0.0;
  sup(0) = -2.0 / h2;
  diag(0) += 2.0 * lambda / h;
  sup(n - 1) = 0.0;
  sub(n - 1) = -2.0 / h2;
  diag(n - 1) += 2.0 * lambda / h;
  return GridFunction1D{K, solve_tridiagonal(sub, diag, sup, f)};
}

GridFunction1D richardson(const GridFunction1D& coarse, const GridFunction1D& fine) {
  if (fine.K != 2 * coarse.K) throw DomainError("richardson: fine grid must have twice the intervals");
  GridFunction1D out{coarse.K, Vector(coarse.K + 1)};
  for (int k = 0; k <= coarse.K; ++k) out.values(k) = (4.0 * fine.values(2 * k) - coarse.values(k)) / 3.0;
  return out;
}

GridFunction1D solve_dirichlet_1d_extrapolated(const PdeProblem& prob, int K) {
  return richardson(solve_dirichlet_1d(prob, K), solve_dirichlet_1d(prob, 2 * K));
}

GridFunction1D solve_robin_1d_extrapolated(const PdeProblem& prob, double lambda, int K) {
  return richardson(solve_robin_1d(prob, lambda, K), solve_robin_1d(prob, lambda, 2 * K));
}

// ---------------------------------------------------------------- R_lambda

double r_lambda(const Field& v, const PdeProblem& prob, const CubeQuadrature& quad) {
  if (prob.dim != 1 || quad.dim != 1) throw DomainError("r_lambda: only d = 1 is supported");
  Field exact;
  Vector dn(2);
  if (prob.exact) {
    exact = *prob.exact;
    const FieldValues eb = exact(quad.boundary.points);
    dn = eb.gradient.cwiseProduct(quad.boundary_normals).colwise().sum().transpose();
  } else {
    const GridFunction1D g = solve_dirichlet_1d_extrapolated(prob, 4096);
    exact = g.as_field();
    dn << -g.endpoint_derivative(0), g.endpoint_derivative(1);
  }
  const Field diff = combine(exact, 1.0, v, -1.0);
  const double interior = 0.5 * quadratic_form_a(diff, diff, prob, quad);
  const Vector vb = v(quad.boundary.points).value;
  const Vector r = -dn / prob.lambda - vb;
  return interior + 0.5 * prob.lambda * quad.boundary.weights.dot(r.cwiseAbs2());
}

// ---------------------------------------------------------------- rate study

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need at least two points");
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::Map<const Vector> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double mx = xv.mean(), my = yv.mean();
  const Vector dx = (xv.array() - mx).matrix();
  const Vector dy = (yv.array() - my).matrix();
  const double sxx = dx.squaredNorm();
  if (sxx == 0.0) throw DomainError("fit_line: x values are all equal");
  LineFit f;
  f.slope = dx.dot(dy) / sxx;
  f.intercept = my - f.slope * mx;
  const double syy = dy.squaredNorm();
  const double sse = (dy - f.slope * dx).squaredNorm();
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

PenaltyStudy penalty_rate_study(const PdeProblem& prob, std::span<const double> lambdas, int K,
                                const CubeQuadrature& quad) {
  if (lambdas.size() < 4) throw DomainError("penalty study: at least four lambda values required");
  const double ratio = lambdas[1] / lambdas[0];
  if (!(lambdas[0] > 0.0) || !(ratio > 1.0)) throw DomainError("penalty study: lambdas must be increasing and positive");
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    if (std::abs(lambdas[k] / lambdas[k - 1] - ratio) > 1e-9 * ratio) {
      throw DomainError("penalty study: lambdas must form a geometric sequence");
    }
  }
  const Field dirichlet = solve_dirichlet_1d(prob, K).as_field();
  PenaltyStudy s;
  std::vector<double> lx, ly;
  for (double lam : lambdas) {
    const Field robin = solve_robin_1d(prob, lam, K).as_field();
    PenaltyRow row;
    row.lambda = lam;
    row.h1_error = h1_distance(robin, dirichlet, quad);
    row.boundary_l2 = l2_boundary_distance(robin, dirichlet, quad);
    row.r_lambda = r_lambda(robin, prob.with_lambda(lam), quad);
    s.rows.push_back(row);
    lx.push_back(std::log(lam));
    ly.push_back(std::log(row.h1_error));
  }
  const LineFit f = fit_line(lx, ly);
  s.slope = f.slope;
  s.intercept = f.intercept;
  s.r_squared = f.r_squared;
  return s;
}

void write_penalty_csv(std::ostream& out, const PenaltyStudy& s) {
  out << "lambda,h1_error,boundary_l2,r_lambda_value\n";
  char buf[160];
  for (const PenaltyRow& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.lambda, r.h1_error, r.boundary_l2, r.r_lambda);
    out << buf;
  }
}

nlohmann::json penalty_summary_json(const PenaltyStudy& s) {
  return {{"slope", s.slope}, {"intercept", s.intercept}, {"r_squared", s.r_squared}, {"points", s.rows.size()}};
}

}  // namespace drm
