#include "drm/bspline.hpp"

#include <cmath>
#include <string>

#include "drm/errors.hpp"
#include "drm/quadrature.hpp"
#include "layer_builder.hpp"

namespace drm {

using detail::Forms;
using detail::LayerBuilder;

namespace {

constexpr double kBinom[4] = {1.0, -3.0, 3.0, -1.0};  // (-1)^j C(3, j)

void check_index(int level, int i) {
  if (level < 1 || level > 30) throw IndexError("spline level must be in [1, 30]");
  if (i <= -3 || i >= (1 << level)) {
    throw IndexError("spline index " + std::to_string(i) + " outside (-3, " + std::to_string(1 << level) +
                     ") at level " + std::to_string(level));
  }
}

}  // namespace

void DyadicSplineIndex::validate() const {
  if (multi_index.empty()) throw IndexError("spline index: empty multi-index");
  for (int i : multi_index) check_index(level, i);
}

int basis_size_1d(int level) {
  if (level < 1 || level > 30) throw IndexError("spline level must be in [1, 30]");
  return (1 << level) + 2;
}

double eval_univariate(int level, int i, double x) {
  check_index(level, i);
  const double h = std::ldexp(1.0, -level);
  if (x <= i * h || x >= (i + 3) * h) return 0.0;
  double s = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double t = x - (i + j) * h;
    if (t > 0.0) s += kBinom[j] * t * t;
  }
  return std::ldexp(s, 2 * level - 1);
}

double eval_univariate_derivative(int level, int i, double x) {
  check_index(level, i);
  const double h = std::ldexp(1.0, -level);
  if (x <= i * h || x >= (i + 3) * h) return 0.0;
  double s = 0.0;
  for (int j = 0; j < 4; ++j) {
    const double t = x - (i + j) * h;
    if (t > 0.0) s += kBinom[j] * t;
  }
  return std::ldexp(s, 2 * level);
}

double eval_multivariate(const DyadicSplineIndex& idx, std::span<const double> x) {
  idx.validate();
  if (x.size() != idx.multi_index.size()) throw ShapeError("spline: point dimension mismatch");
  double p = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) p *= eval_univariate(idx.level, idx.multi_index[j], x[j]);
  return p;
}

Vector gradient_multivariate(const DyadicSplineIndex& idx, std::span<const double> x) {
  idx.validate();
  const std::size_t d = idx.multi_index.size();
  if (x.size() != d) throw ShapeError("spline: point dimension mismatch");
  std::vector<double> v(d), g(d);
  for (std::size_t j = 0; j < d; ++j) {
    v[j] = eval_univariate(idx.level, idx.multi_index[j], x[j]);
    g[j] = eval_univariate_derivative(idx.level, idx.multi_index[j], x[j]);
  }
  Vector out(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    double p = g[j];
    for (std::size_t k = 0; k < d; ++k) {
      if (k != j) p *= v[k];
    }
    out(static_cast<Eigen::Index>(j)) = p;
  }
  return out;
}

// ---------------------------------------------------------------- combinations

void SplineCombination::validate() const {
  if (dim < 1) throw IndexError("spline combination: dim must be >= 1");
  for (const auto& [index, c] : coeffs) {
    if (static_cast<int>(index.size()) != dim) throw IndexError("spline combination: index of wrong length");
    for (int i : index) check_index(level, i);
    if (!std::isfinite(c)) throw DomainError("spline combination: non-finite coefficient");
  }
}

double SplineCombination::eval(std::span<const double> x) const {
  double s = 0.0;
  for (const auto& [index, c] : coeffs) s += c * eval_multivariate({level, index}, x);
  return s;
}

Field SplineCombination::as_field() const {
  return [self = *this](const PointSet& x) {
    FieldValues out{Vector::Zero(x.cols()), Matrix::Zero(x.rows(), x.cols())};
    std::vector<double> p(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      for (Eigen::Index j = 0; j < x.rows(); ++j) p[static_cast<std::size_t>(j)] = x(j, k);
      for (const auto& [index, c] : self.coeffs) {
        const DyadicSplineIndex idx{self.level, index};
        out.value(k) += c * eval_multivariate(idx, p);
        out.gradient.col(k) += c * gradient_multivariate(idx, p);
      }
    }
    return out;
  };
}

// ---------------------------------------------------------------- compilation

Network compile_to_network(const DyadicSplineIndex& idx) {
  idx.validate();
  const int d = idx.dim();
  const int l = idx.level;
  const double h = std::ldexp(1.0, -l);
  const double scale = std::ldexp(1.0, 2 * l - 1);

  std::vector<Layer> layers;
  LayerBuilder first(d);
  for (int k = 0; k < d; ++k) {
    Forms shifted{Matrix::Zero(4, d), Vector(4)};
    for (int j = 0; j < 4; ++j) {
      shifted.coef(j, k) = 1.0;
      shifted.offset(j) = -(idx.multi_index[static_cast<std::size_t>(k)] + j) * h;
    }
    first.add(shifted, Activation::Relu2);
  }
  layers.push_back(first.build());

  // Univariate factors as forms over the first layer.
  Forms values{Matrix::Zero(d, 4 * d), Vector::Zero(d)};
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < 4; ++j) values.coef(k, 4 * k + j) = scale * kBinom[j];
  }

  // Multiply pairwise until one value is left; an odd leftover is carried.
  while (values.count() > 1) {
    const Eigen::Index m = values.count();
    const Eigen::Index pairs = m / 2;
    const Matrix even_rows = values.coef(Eigen::seqN(0, pairs, 2), Eigen::all);
    const Matrix odd_rows = values.coef(Eigen::seqN(1, pairs, 2), Eigen::all);
    Forms x{even_rows, values.offset(Eigen::seqN(0, pairs, 2))};
    Forms y{odd_rows, values.offset(Eigen::seqN(1, pairs, 2))};
    LayerBuilder b(values.width());
    const Eigen::Index prod_at = detail::add_product(b, x, y);
    Eigen::Index carry_at = -1;
    if (m % 2 == 1) {
      Forms last{values.coef.bottomRows(1), values.offset.tail(1)};
      carry_at = detail::add_relu2_carry_nonneg(b, last);
    }
    const Eigen::Index w = b.size();
    layers.push_back(b.build());
    Forms next = detail::product_result(w, prod_at, pairs);
    if (carry_at >= 0) {
      Forms carried = detail::relu2_carry_nonneg_result(w, carry_at, 1);
      Forms joined{Matrix(pairs + 1, w), Vector(pairs + 1)};
      joined.coef << next.coef, carried.coef;
      joined.offset << next.offset, carried.offset;
      next = std::move(joined);
    }
    values = std::move(next);
  }
  layers.push_back(detail::output_layer(values));
  return Network(d, std::move(layers));
}

Network compile_combination(const SplineCombination& c) {
  c.validate();
  if (c.coeffs.empty()) {
    return Network(c.dim, {Layer(Matrix::Zero(1, c.dim), Vector::Zero(1), Activation::Identity)});
  }
  std::vector<Network> parts;
  std::vector<double> scales;
  parts.reserve(c.coeffs.size());
  for (const auto& [index, coeff] : c.coeffs) {
    parts.push_back(compile_to_network({c.level, index}));
    scales.push_back(coeff);
  }
  return parallel_sum(parts, scales);
}

// ---------------------------------------------------------------- fitting

namespace {

// Applies `op` (r x dims[mode]) along one mode of a tensor stored with the
// first index fastest.
Vector mode_product(const Vector& data, std::vector<Eigen::Index>& dims, int mode, const Matrix& op) {
  Eigen::Index left = 1, right = 1;
  for (int k = 0; k < mode; ++k) left *= dims[static_cast<std::size_t>(k)];
  for (std::size_t k = static_cast<std::size_t>(mode) + 1; k < dims.size(); ++k) right *= dims[k];
  const Eigen::Index n = dims[static_cast<std::size_t>(mode)];
  const Eigen::Index r = op.rows();
  Vector out(left * r * right);
  for (Eigen::Index rb = 0; rb < right; ++rb) {
    Eigen::Map<const Matrix> slab(data.data() + rb * left * n, left, n);
    Eigen::Map<Matrix> dst(out.data() + rb * left * r, left, r);
    dst.noalias() = slab * op.transpose();
  }
  dims[static_cast<std::size_t>(mode)] = r;
  return out;
}

// Applies ops[k] along every mode k.
Vector apply_all_modes(Vector data, std::vector<Eigen::Index> dims, const std::vector<const Matrix*>& ops) {
  for (std::size_t k = 0; k < ops.size(); ++k) data = mode_product(data, dims, static_cast<int>(k), *ops[k]);
  return data;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// Kronecker product with the factor of coordinate 0 varying fastest.
Matrix kron_modes(const std::vector<const Matrix*>& factors) {
  Matrix out = *factors.back();
  for (std::size_t k = factors.size() - 1; k-- > 0;) out = kron(out, *factors[k]);
  return out;
}

}  // namespace

H1Fit fit_h1(const Field& target, int level, int d, const FitOptions& opts) {
  if (d < 1) throw DomainError("fit_h1: d must be >= 1");
  if (opts.points_per_interval < 1) throw DomainError("fit_h1: points_per_interval must be >= 1");
  const int nb = basis_size_1d(level);
  const int cells = 1 << level;
  const QuadratureRule line = composite_gauss_legendre(opts.points_per_interval, cells);
  const Eigen::Index np = line.size();

  // Univariate basis values / derivatives at the line nodes, and the
  // weighted 1D mass and stiffness matrices.
  Matrix B(nb, np), D(nb, np);
  for (int a = 0; a < nb; ++a) {
    for (Eigen::Index q = 0; q < np; ++q) {
      B(a, q) = eval_univariate(level, a - 2, line.points(0, q));
      D(a, q) = eval_univariate_derivative(level, a - 2, line.points(0, q));
    }
  }
  const Matrix M = B * line.weights.asDiagonal() * B.transpose();
  const Matrix K = D * line.weights.asDiagonal() * D.transpose();

  Matrix G;
  {
    std::vector<const Matrix*> f(static_cast<std::size_t>(d), &M);
    G = kron_modes(f);
    for (int j = 0; j < d; ++j) {
      f.assign(static_cast<std::size_t>(d), &M);
      f[static_cast<std::size_t>(j)] = &K;
      G += kron_modes(f);
    }
  }

  const QuadratureRule grid = tensor_rule(line, d);
  const FieldValues u = target(grid.points);
  if (u.value.size() != grid.size() || u.gradient.rows() != d) throw ShapeError("fit_h1: target shape mismatch");

  const std::vector<Eigen::Index> pdims(static_cast<std::size_t>(d), np);
  const std::vector<Eigen::Index> cdims(static_cast<std::size_t>(d), nb);
  Vector rhs;
  {
    std::vector<const Matrix*> ops(static_cast<std::size_t>(d), &B);
    rhs = apply_all_modes(grid.weights.cwiseProduct(u.value), pdims, ops);
    for (int j = 0; j < d; ++j) {
      ops.assign(static_cast<std::size_t>(d), &B);
      ops[static_cast<std::size_t>(j)] = &D;
      rhs += apply_all_modes(grid.weights.cwiseProduct(u.gradient.row(j).transpose()), pdims, ops);
    }
  }

  Eigen::LDLT<Matrix> ldlt(G);
  const Vector diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-13 * diag.cwiseAbs().maxCoeff()) {
    throw RankDeficiencyError("fit_h1: normal equations are singular; use more points per interval");
  }
  const Vector coef = ldlt.solve(rhs);

  // Residual evaluated directly on the grid.
  const Matrix Bt = B.transpose();
  const Matrix Dt = D.transpose();
  std::vector<const Matrix*> ops(static_cast<std::size_t>(d), &Bt);
  Vector err = (apply_all_modes(coef, cdims, ops) - u.value).cwiseAbs2();
  for (int j = 0; j < d; ++j) {
    ops.assign(static_cast<std::size_t>(d), &Bt);
    ops[static_cast<std::size_t>(j)] = &Dt;
    err += (apply_all_modes(coef, cdims, ops) - u.gradient.row(j).transpose()).cwiseAbs2();
  }

  H1Fit fit;
  fit.residual = std::sqrt(grid.weights.dot(err));
  fit.spline.level = level;
  fit.spline.dim = d;
  for (Eigen::Index k = 0; k < coef.size(); ++k) {
    std::vector<int> index(static_cast<std::size_t>(d));
    Eigen::Index rest = k;
    for (int j = 0; j < d; ++j) {
      index[static_cast<std::size_t>(j)] = static_cast<int>(rest % nb) - 2;
      rest /= nb;
    }
    fit.spline.coeffs.emplace(std::move(index), coef(k));
  }
  return fit;
}

double approximation_width(double eps, double c2, int d, double constant) {
  if (!(eps > 0.0)) throw DomainError("approximation_width: eps must be positive");
  if (d < 1) throw DomainError("approximation_width: d must be >= 1");
  const double terms = std::max(1.0, std::ceil(constant * c2 / eps - 4.0));
  return 4.0 * d * std::pow(terms, d);
}

// ---------------------------------------------------------------- JSON

nlohmann::json spline_to_json(const SplineCombination& c) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [index, coeff] : c.coeffs) terms.push_back({{"index", index}, {"coeff", coeff}});
  return {{"level", c.level}, {"dim", c.dim}, {"terms", std::move(terms)}};
}

SplineCombination spline_from_json(const nlohmann::json& j) {
  SplineCombination c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "level" && it.key() != "dim" && it.key() != "terms") {
        throw ConfigError("spline: unknown key '" + it.key() + "'");
      }
    }
    c.level = j.at("level").get<int>();
    c.dim = j.at("dim").get<int>();
    for (const auto& t : j.at("terms")) {
      auto [it, inserted] = c.coeffs.emplace(t.at("index").get<std::vector<int>>(), t.at("coeff").get<double>());
      if (!inserted) throw ConfigError("spline: duplicate index");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("spline: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace drm
