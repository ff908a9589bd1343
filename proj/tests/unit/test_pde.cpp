#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "drm/errors.hpp"
#include "drm/pde.hpp"
#include "drm/quadrature.hpp"

using namespace drm;
using std::numbers::pi;

TEST(Sampling, OneDimensionalBoundaryIsFair) {
  const PointSet y = sample_boundary(10000, 1, 0);
  int zeros = 0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    ASSERT_TRUE(y(0, k) == 0.0 || y(0, k) == 1.0);
    zeros += y(0, k) == 0.0;
  }
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(Sampling, InteriorMean) {
  const PointSet x = sample_interior(100000, 2, 1);
  EXPECT_NEAR(x.row(0).mean(), 0.5, 0.01);
  EXPECT_NEAR(x.row(1).mean(), 0.5, 0.01);
  EXPECT_GT(x.minCoeff(), 0.0);
  EXPECT_LT(x.maxCoeff(), 1.0);
}

TEST(Sampling, FaceFrequency) {
  const PointSet y = sample_boundary(60000, 3, 2);
  int on_face = 0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const int f = face_of(y.col(k));
    ASSERT_GE(f, 0);
    on_face += f == 0;
  }
  EXPECT_NEAR(on_face / 60000.0, 1.0 / 6.0, 0.01);
}

TEST(Sampling, DeterministicGivenSeed) {
  EXPECT_TRUE(sample_interior(100, 3, 5) == sample_interior(100, 3, 5));
  EXPECT_TRUE(sample_boundary(100, 3, 5) == sample_boundary(100, 3, 5));
  EXPECT_FALSE(sample_interior(100, 3, 5) == sample_interior(100, 3, 6));
  // A prefix of a larger batch is the smaller batch.
  EXPECT_TRUE(sample_interior(200, 2, 9).leftCols(100) == sample_interior(100, 2, 9));
}

TEST(Sampling, Preconditions) {
  EXPECT_THROW(sample_interior(10, 0, 0), DomainError);
  EXPECT_THROW(sample_boundary(10, 0, 0), DomainError);
  EXPECT_THROW(sample_interior(0, 1, 0), DomainError);
}

TEST(Quadrature, ExactForPolynomials) {
  const QuadratureRule r = gauss_legendre(8);
  for (int p = 0; p <= 15; ++p) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < r.size(); ++k) s += r.weights(k) * std::pow(r.points(0, k), p);
    EXPECT_NEAR(s, 1.0 / (p + 1), 1e-13 / (p + 1)) << p;
  }
  const CubeQuadrature c = CubeQuadrature::make(2, 4, 3);
  double s = 0.0;
  for (Eigen::Index k = 0; k < c.interior.size(); ++k) {
    s += c.interior.weights(k) * std::pow(c.interior.points(0, k), 7) * std::pow(c.interior.points(1, k), 5);
  }
  EXPECT_NEAR(s, 1.0 / 48.0, 1e-13);
}

TEST(Quadrature, WeightsAndBoundary) {
  for (int d = 1; d <= 3; ++d) {
    const CubeQuadrature c = CubeQuadrature::make(d);
    EXPECT_GT(c.interior.weights.minCoeff(), 0.0);
    EXPECT_NEAR(c.interior.weights.sum(), 1.0, 1e-12);
    EXPECT_NEAR(c.boundary.weights.sum(), 2.0 * d, 1e-12);
    for (Eigen::Index k = 0; k < c.boundary.size(); ++k) {
      const int f = face_of(c.boundary.points.col(k));
      ASSERT_GE(f, 0);
      EXPECT_EQ(c.boundary_normals(f / 2, k), f % 2 ? 1.0 : -1.0);
    }
  }
  EXPECT_EQ(CubeQuadrature::make(2).cells, 32);
  EXPECT_EQ(CubeQuadrature::make(3).cells, 8);
}

TEST(Norms, ClosedForms) {
  const CubeQuadrature q = CubeQuadrature::make(1);
  const Field x = pointwise_field([](const Eigen::Ref<const Vector>& p) { return p(0); },
                                  [](const Eigen::Ref<const Vector>&) { return Vector::Ones(1); });
  const Field s = pointwise_field([](const Eigen::Ref<const Vector>& p) { return std::sin(pi * p(0)); },
                                  [](const Eigen::Ref<const Vector>& p) {
                                    return Vector::Constant(1, pi * std::cos(pi * p(0)));
                                  });
  EXPECT_EQ(h1_distance(s, s, q), 0.0);
  EXPECT_NEAR(h1_distance(x, constant_field(0.0), q), std::sqrt(1.0 / 3.0 + 1.0), 1e-13);
  EXPECT_NEAR(h1_distance(s, constant_field(0.0), q), std::sqrt(0.5 + pi * pi / 2.0), 1e-13);
  EXPECT_NEAR(l2_boundary_distance(x, constant_field(0.0), q), 1.0, 1e-15);
  const CubeQuadrature q2 = CubeQuadrature::make(2);
  const Field x1 = pointwise_field([](const Eigen::Ref<const Vector>& p) { return p(0); },
                                   [](const Eigen::Ref<const Vector>&) { return Vector::Unit(2, 0); });
  // Boundary integral of x1^2: faces x1 = 0 (0), x1 = 1 (1), two faces with int x^2 = 1/3.
  EXPECT_NEAR(std::pow(l2_boundary_distance(x1, constant_field(0.0), q2), 2), 1.0 + 2.0 / 3.0, 1e-13);
}

TEST(Norms, TriangleInequality) {
  const CubeQuadrature q = CubeQuadrature::make(2, 4, 8);
  auto wave = [](double a, double b) {
    return pointwise_field(
        [a, b](const Eigen::Ref<const Vector>& p) { return std::sin(a * p(0)) * std::cos(b * p(1)); },
        [a, b](const Eigen::Ref<const Vector>& p) {
          Vector g(2);
          g << a * std::cos(a * p(0)) * std::cos(b * p(1)), -b * std::sin(a * p(0)) * std::sin(b * p(1));
          return g;
        });
  };
  for (int t = 0; t < 10; ++t) {
    const Field u = wave(1.0 + t, 2.0), v = wave(0.5, 1.0 + 0.3 * t), w = wave(3.0 - 0.2 * t, 0.7);
    EXPECT_LE(h1_distance(u, w, q), h1_distance(u, v, q) + h1_distance(v, w, q) + 1e-12);
  }
}

TEST(Problems, RegistryAndManufacturedSolutions) {
  for (const std::string& name : problem_names()) {
    const PdeProblem p = make_problem(name, 10.0);
    EXPECT_NO_THROW(p.audit());
    ASSERT_TRUE(p.exact.has_value()) << name;
    // -Laplace u + w u - f by second differences at interior points.
    const PointSet x = sample_interior(50, p.dim, 3);
    const double h = 1e-4;
    const Vector u0 = (*p.exact)(x).value;
    Vector lap = Vector::Zero(x.cols());
    for (int j = 0; j < p.dim; ++j) {
      PointSet xp = x, xm = x;
      xp.row(j).array() += h;
      xm.row(j).array() -= h;
      lap += ((*p.exact)(xp).value - 2.0 * u0 + (*p.exact)(xm).value) / (h * h);
    }
    const Vector residual = -lap + p.w(x).cwiseProduct(u0) - p.f(x);
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-4 * std::max(1.0, p.c3)) << name;
    // Exact solutions vanish on the boundary.
    EXPECT_LE((*p.exact)(sample_boundary(50, p.dim, 4)).value.cwiseAbs().maxCoeff(), 1e-15) << name;
  }
  EXPECT_THROW(make_problem("nope"), ConfigError);
  EXPECT_THROW(make_problem("sine-1d", 0.0), DomainError);
}

TEST(Problems, JsonLoading) {
  const auto j = nlohmann::json::parse(R"({"dim":1,"w":"const:1","f":"registry:sine-1d","lambda":50})");
  const PdeProblem p = problem_from_json(j);
  EXPECT_EQ(p.lambda, 50.0);
  EXPECT_TRUE(p.exact.has_value());
  EXPECT_NEAR(p.c3, pi * pi + 1.0, 1e-12);

  auto other_w = j;
  other_w["w"] = "const:2";
  const PdeProblem q = problem_from_json(other_w);
  EXPECT_FALSE(q.exact.has_value());
  EXPECT_EQ(q.c1, 2.0);

  auto varw = j;
  varw["w"] = "registry:sine-varw-1d";
  varw["f"] = "registry:sine-varw-1d";
  EXPECT_TRUE(problem_from_json(varw).exact.has_value());

  auto constant = j;
  constant["f"] = "const:-3";
  EXPECT_EQ(problem_from_json(constant).c3, 3.0);

  for (const char* bad : {R"({"dim":1,"w":"const:1","f":"registry:sine-1d"})",
                          R"({"dim":1,"w":"const:x","f":"registry:sine-1d","lambda":1})",
                          R"({"dim":2,"w":"const:1","f":"registry:sine-1d","lambda":1})",
                          R"({"dim":1,"w":"const:-1","f":"const:0","lambda":1})",
                          R"({"dim":1,"w":"const:1","f":"const:0","lambda":1,"x":0})",
                          R"({"dim":1,"w":"linear","f":"const:0","lambda":1})"}) {
    EXPECT_THROW(problem_from_json(nlohmann::json::parse(bad)), ConfigError) << bad;
  }
}

TEST(Problems, AuditCatchesWrongBounds) {
  PdeProblem p = make_problem("sine-1d", 1.0);
  p.c3 = 2.0;
  EXPECT_THROW(p.audit(), DomainError);
  PdeProblem q = make_problem("sine-varw-1d", 1.0);
  q.w_sup = 1.5;
  EXPECT_THROW(q.audit(), DomainError);
}
