#include "drm/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drm/errors.hpp"
#include "drm/rng.hpp"

namespace drm {

using std::numbers::pi;

void PdeProblem::validate() const {
  if (dim < 1) throw DomainError("problem: dim must be >= 1");
  if (!w || !f) throw DomainError("problem: w and f are required");
  if (c1 < 0.0) throw DomainError("problem: c1 must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("problem: lambda must be positive");
  if (w_sup < c1) throw DomainError("problem: sup w below c1");
  if (c3 < w_sup) throw DomainError("problem: c3 must dominate sup w");
}

void PdeProblem::audit(std::size_t samples, std::uint64_t seed) const {
  validate();
  const PointSet x = sample_interior(samples, dim, seed);
  const Vector wv = w(x);
  const Vector fv = f(x);
  const double slack = 1e-12;
  if (wv.minCoeff() < c1 - slack) throw DomainError("problem '" + name + "': w below declared c1");
  if (wv.maxCoeff() > w_sup + slack) throw DomainError("problem '" + name + "': w above declared sup");
  if (fv.cwiseAbs().maxCoeff() > c3 + slack) throw DomainError("problem '" + name + "': |f| above declared c3");
}

PdeProblem PdeProblem::with_lambda(double lam) const {
  PdeProblem p = *this;
  p.lambda = lam;
  p.validate();
  return p;
}

namespace {

struct Entry {
  std::string name;
  int dim;
  ScalarField w;
  std::optional<double> w_const;
  double c1;
  double w_sup;
  ScalarField f;
  double f_sup;
  std::optional<Field> exact;
};

double sine_product(const Eigen::Ref<const Vector>& x) {
  double p = 1.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) p *= std::sin(pi * x(j));
  return p;
}

Vector sine_product_gradient(const Eigen::Ref<const Vector>& x) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    double p = pi * std::cos(pi * x(j));
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (k != j) p *= std::sin(pi * x(k));
    }
    g(j) = p;
  }
  return g;
}

Entry sine_entry(int d) {
  const double amp = d * pi * pi + 1.0;
  return Entry{"sine-" + std::to_string(d) + "d",
               d,
               constant_scalar(1.0),
               1.0,
               1.0,
               1.0,
               pointwise_scalar([amp](const Eigen::Ref<const Vector>& x) { return amp * sine_product(x); }),
               amp,
               pointwise_field(sine_product, sine_product_gradient)};
}

Entry zero_entry(int d) {
  return Entry{"zero-" + std::to_string(d) + "d", d, constant_scalar(1.0), 1.0, 1.0, 1.0,
               constant_scalar(0.0), 0.0, constant_field(0.0)};
}

std::vector<Entry> registry() {
  std::vector<Entry> r;
  for (int d = 1; d <= 3; ++d) r.push_back(sine_entry(d));
  r.push_back(Entry{
      "sine-varw-1d", 1,
      pointwise_scalar([](const Eigen::Ref<const Vector>& x) { return 1.0 + x(0); }), std::nullopt, 1.0, 2.0,
      pointwise_scalar([](const Eigen::Ref<const Vector>& x) {
        return (pi * pi + 1.0 + x(0)) * std::sin(pi * x(0));
      }),
      pi * pi + 2.0, pointwise_field(sine_product, sine_product_gradient)});
  {
    const double ch = std::cosh(0.5);
    r.push_back(Entry{
        "constant-1d", 1, constant_scalar(1.0), 1.0, 1.0, 1.0, constant_scalar(1.0), 1.0,
        pointwise_field([ch](const Eigen::Ref<const Vector>& x) { return 1.0 - std::cosh(x(0) - 0.5) / ch; },
                        [ch](const Eigen::Ref<const Vector>& x) {
                          return Vector::Constant(1, -std::sinh(x(0) - 0.5) / ch);
                        })});
  }
  for (int d = 1; d <= 3; ++d) r.push_back(zero_entry(d));
  return r;
}

const Entry& find_entry(std::string_view name) {
  static const std::vector<Entry> entries = registry();
  for (const Entry& e : entries) {
    if (e.name == name) return e;
  }
  throw ConfigError("unknown problem '" + std::string(name) + "'");
}

PdeProblem from_entry(const Entry& e, double lambda) {
  PdeProblem p;
  p.name = e.name;
  p.dim = e.dim;
  p.w = e.w;
  p.f = e.f;
  p.c1 = e.c1;
  p.w_sup = e.w_sup;
  p.c3 = std::max(e.w_sup, e.f_sup);
  p.lambda = lambda;
  p.exact = e.exact;
  p.validate();
  return p;
}

double parse_const(const std::string& spec, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(spec.substr(6), &used);
    if (used != spec.size() - 6 || !std::isfinite(v)) throw std::invalid_argument(spec);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("problem: bad constant in '") + what + "': " + spec);
  }
}

}  // namespace

PdeProblem make_problem(std::string_view name, double lambda) {
  return from_entry(find_entry(name), lambda);
}

std::vector<std::string> problem_names() {
  std::vector<std::string> out;
  for (const Entry& e : registry()) out.push_back(e.name);
  return out;
}

PdeProblem problem_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "dim" && it.key() != "w" && it.key() != "f" && it.key() != "lambda") {
      throw ConfigError("problem: unknown key '" + it.key() + "'");
    }
  }
  if (!j.contains("dim") || !j.contains("w") || !j.contains("f") || !j.contains("lambda")) {
    throw ConfigError("problem: dim, w, f and lambda are required");
  }
  PdeProblem p;
  std::string w_spec, f_spec;
  try {
    p.dim = j.at("dim").get<int>();
    w_spec = j.at("w").get<std::string>();
    f_spec = j.at("f").get<std::string>();
    p.lambda = j.at("lambda").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }

  const Entry* w_entry = nullptr;
  const Entry* f_entry = nullptr;
  std::optional<double> w_const;
  if (w_spec.rfind("const:", 0) == 0) {
    const double v = parse_const(w_spec, "w");
    if (v < 0.0) throw ConfigError("problem: w must be non-negative");
    w_const = v;
    p.w = constant_scalar(v);
    p.c1 = v;
    p.w_sup = v;
  } else if (w_spec.rfind("registry:", 0) == 0) {
    w_entry = &find_entry(w_spec.substr(9));
    p.w = w_entry->w;
    p.c1 = w_entry->c1;
    p.w_sup = w_entry->w_sup;
    w_const = w_entry->w_const;
  } else {
    throw ConfigError("problem: w must be 'const:<v>' or 'registry:<name>'");
  }

  double f_sup = 0.0;
  if (f_spec.rfind("const:", 0) == 0) {
    const double v = parse_const(f_spec, "f");
    p.f = constant_scalar(v);
    f_sup = std::abs(v);
    p.name = "custom";
  } else if (f_spec.rfind("registry:", 0) == 0) {
    f_entry = &find_entry(f_spec.substr(9));
    p.f = f_entry->f;
    f_sup = f_entry->f_sup;
    p.name = f_entry->name;
  } else {
    throw ConfigError("problem: f must be 'const:<v>' or 'registry:<name>'");
  }
  for (const Entry* e : {w_entry, f_entry}) {
    if (e && e->dim != p.dim) throw ConfigError("problem: registry entry '" + e->name + "' has another dimension");
  }
  p.c3 = std::max(p.w_sup, f_sup);

  if (f_entry) {
    const bool same_w = (w_entry == f_entry) ||
                        (w_const && f_entry->w_const && *w_const == *f_entry->w_const);
    if (same_w) p.exact = f_entry->exact;
    else p.name = "custom";
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------- sampling

PointSet sample_interior(std::size_t n, int d, std::uint64_t seed) {
  if (d < 1) throw DomainError("sample_interior: d must be >= 1");
  if (n < 1) throw DomainError("sample_interior: n must be >= 1");
  const CounterRng rng(seed, 0);
  PointSet x(d, static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    for (int j = 0; j < d; ++j) x(j, k) = rng.open01(static_cast<std::uint64_t>(k) * d + j);
  }
  return x;
}

PointSet sample_boundary(std::size_t m, int d, std::uint64_t seed) {
  if (d < 1) throw DomainError("sample_boundary: d must be >= 1");
  if (m < 1) throw DomainError("sample_boundary: m must be >= 1");
  const CounterRng rng(seed, 1);
  PointSet y(d, static_cast<Eigen::Index>(m));
  const std::uint64_t stride = static_cast<std::uint64_t>(d) + 1;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const std::uint64_t base = static_cast<std::uint64_t>(k) * stride;
    const auto face = static_cast<int>(rng.below(base, 2 * static_cast<std::uint64_t>(d)));
    const int axis = face / 2;
    for (int j = 0; j < d; ++j) {
      y(j, k) = (j == axis) ? static_cast<double>(face % 2) : rng.open01(base + 1 + j);
    }
  }
  return y;
}

SampleBatch sample_batch(std::size_t n, std::size_t m, int d, std::uint64_t seed) {
  return SampleBatch{sample_interior(n, d, seed), sample_boundary(m, d, seed), seed};
}

int face_of(const Eigen::Ref<const Vector>& y) {
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (y(j) == 0.0) return static_cast<int>(2 * j);
    if (y(j) == 1.0) return static_cast<int>(2 * j + 1);
  }
  return -1;
}

// ---------------------------------------------------------------- norms

namespace {

void require_dim(const CubeQuadrature& quad, const FieldValues& v) {
  if (v.gradient.rows() != quad.dim) throw ShapeError("field gradient dimension mismatch");
}

}  // namespace

double h1_distance(const Field& u, const Field& v, const CubeQuadrature& quad) {
  const FieldValues a = u(quad.interior.points);
  const FieldValues b = v(quad.interior.points);
  require_dim(quad, a);
  require_dim(quad, b);
  const Vector dv = a.value - b.value;
  const Vector dg = (a.gradient - b.gradient).colwise().squaredNorm().transpose();
  return std::sqrt(quad.interior.weights.dot(dv.cwiseAbs2() + dg));
}

double h1_norm(const Field& u, const CubeQuadrature& quad) {
  return h1_distance(u, constant_field(0.0), quad);
}

double l2_distance(const Field& u, const Field& v, const CubeQuadrature& quad) {
  const Vector dv = u(quad.interior.points).value - v(quad.interior.points).value;
  return std::sqrt(quad.interior.weights.dot(dv.cwiseAbs2()));
}

double l2_boundary_distance(const Field& u, const Field& v, const CubeQuadrature& quad) {
  const Vector dv = u(quad.boundary.points).value - v(quad.boundary.points).value;
  return std::sqrt(quad.boundary.weights.dot(dv.cwiseAbs2()));
}

}  // namespace drm
