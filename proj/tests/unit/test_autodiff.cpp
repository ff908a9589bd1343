#include <gtest/gtest.h>

#include <cmath>

#include "drm/autodiff.hpp"
#include "drm/energy.hpp"
#include "drm/errors.hpp"
#include "drm/network.hpp"
#include "drm/pde.hpp"
#include "drm/rng.hpp"

using namespace drm;
using ad::ParameterSet;
using ad::Tape;
using ad::Var;

namespace {

Vector finite_difference(const ad::ParametricLoss& loss, const ParameterSet& params, double h) {
  const Vector flat = ad::flatten(params);
  Vector g(flat.size());
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    Vector p = flat, m = flat;
    p(k) += h;
    m(k) -= h;
    const double fp = ad::grad_params(loss, ad::unflatten(p, params)).value;
    const double fm = ad::grad_params(loss, ad::unflatten(m, params)).value;
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

Matrix random_matrix(CounterRng::Cursor& c, Eigen::Index r, Eigen::Index k, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, k);
  for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = c.uniform(lo, hi);
  return m;
}

// Moves entries away from 0 by at least `gap` keeping the sign.
Matrix away_from_zero(Matrix m, double gap) {
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    double& v = m.data()[j];
    v = (v >= 0 ? 1.0 : -1.0) * (std::abs(v) + gap);
  }
  return m;
}

}  // namespace

TEST(Autodiff, SquareOfParameter) {
  auto loss = [](Tape& t, std::span<const Var> p) { return t.reduce(t.square(p[0]), 1.0); };
  const auto r = ad::grad_params(loss, {Matrix::Constant(1, 1, 3.0)});
  EXPECT_DOUBLE_EQ(r.value, 9.0);
  EXPECT_DOUBLE_EQ(r.gradient[0](0, 0), 6.0);
}

TEST(Autodiff, InactiveReluSquared) {
  auto loss = [](Tape& t, std::span<const Var> p) { return t.reduce(t.relu_power(p[0], 2), 1.0); };
  const auto r = ad::grad_params(loss, {Matrix::Constant(1, 1, -1.0)});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.gradient[0](0, 0), 0.0);
}

TEST(Autodiff, PrimitivesMatchCentralDifferences) {
  CounterRng rng(11);
  auto c = rng.cursor();
  const Matrix reduce_w = random_matrix(c, 2, 4);
  const std::vector<std::pair<const char*, ad::ParametricLoss>> cases = {
      {"affine", [](Tape& t, std::span<const Var> p) { return t.reduce(t.square(t.affine(p[0], p[1], p[2])), 1.0); }},
      {"affine-no-bias", [](Tape& t, std::span<const Var> p) { return t.reduce(t.square(t.affine(p[0], p[1])), 0.5); }},
      {"relu1", [](Tape& t, std::span<const Var> p) { return t.reduce(t.square(t.relu_power(p[1], 1)), 1.0); }},
      {"relu2", [](Tape& t, std::span<const Var> p) { return t.reduce(t.relu_power(p[1], 2), 1.0); }},
      {"sum", [](Tape& t, std::span<const Var> p) { return t.reduce(t.square(t.sum(p[1], p[1], -0.3)), 1.0); }},
      {"scale", [](Tape& t, std::span<const Var> p) { return t.reduce(t.square(t.scale(p[1], 2.5)), 1.0); }},
      {"product", [](Tape& t, std::span<const Var> p) { return t.reduce(t.product(p[1], t.square(p[1])), 1.0); }},
      {"reduce", [reduce_w](Tape& t, std::span<const Var> p) { return t.reduce(t.square(p[1]), reduce_w); }},
  };
  for (const auto& [name, loss] : cases) {
    for (int trial = 0; trial < 100; ++trial) {
      ParameterSet params = {random_matrix(c, 3, 2), away_from_zero(random_matrix(c, 2, 4), 1e-3), random_matrix(c, 3, 1)};
      // Keep the affine pre-activations of the first case smooth as well.
      const auto r = ad::grad_params(loss, params);
      const Vector fd = finite_difference(loss, params, 1e-5);
      const Vector g = ad::flatten(r.gradient);
      if (fd.norm() == 0.0) {
        EXPECT_EQ(g.norm(), 0.0) << name;
      } else {
        EXPECT_LE(relative_error(g, fd), 1e-5) << name << " trial " << trial;
      }
    }
  }
}

TEST(Autodiff, EnergyGradientMatchesCentralDifferences) {
  const Network net = random_init({2, 8, 1.0, {2}, std::nullopt}, 1, 0);
  const PdeProblem prob = make_problem("sine-1d", 10.0);
  const EnergyBatch batch = EnergyBatch::make(sample_batch(16, 16, 1, 0), prob);
  const ad::ParametricLoss loss = [&](Tape& t, std::span<const Var> p) {
    return record_energy(t, p, net, batch, prob.lambda).total;
  };
  const auto r = ad::grad_params(loss, net.parameters());
  const Vector fd = finite_difference(loss, net.parameters(), 1e-5);
  EXPECT_LE(relative_error(ad::flatten(r.gradient), fd), 1e-5);
}

TEST(Autodiff, GradientOfSumIsSumOfGradients) {
  CounterRng rng(5);
  auto c = rng.cursor();
  const ParameterSet params = {random_matrix(c, 4, 3), random_matrix(c, 3, 6), random_matrix(c, 4, 1)};
  const ad::ParametricLoss f = [](Tape& t, std::span<const Var> p) {
    return t.reduce(t.relu_power(t.affine(p[0], p[1], p[2]), 2), 1.0);
  };
  const ad::ParametricLoss g = [](Tape& t, std::span<const Var> p) {
    return t.reduce(t.square(t.affine(p[0], p[1])), 0.25);
  };
  const ad::ParametricLoss both = [&](Tape& t, std::span<const Var> p) { return t.sum(f(t, p), g(t, p)); };
  const Vector gf = ad::flatten(ad::grad_params(f, params).gradient);
  const Vector gg = ad::flatten(ad::grad_params(g, params).gradient);
  const Vector gb = ad::flatten(ad::grad_params(both, params).gradient);
  EXPECT_LE((gb - gf - gg).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, gb.cwiseAbs().maxCoeff()));
}

TEST(Autodiff, NonFiniteValueReportsNode) {
  Tape t;
  const Var a = t.parameter(Matrix::Constant(1, 1, 1e200));
  const Var b = t.scale(a, 2.0);
  const std::size_t next = t.size();
  try {
    t.square(b);
    FAIL() << "expected overflow";
  } catch (const NumericOverflowError& e) {
    EXPECT_EQ(e.node(), next);
  }
}

TEST(Autodiff, NonFiniteParameterRejected) {
  auto loss = [](Tape& t, std::span<const Var> p) { return t.reduce(p[0], 1.0); };
  EXPECT_THROW(ad::grad_params(loss, {Matrix::Constant(1, 1, std::nan(""))}), DomainError);
}

TEST(Autodiff, TapeIsSingleUseAndShapeChecked) {
  Tape t;
  const Var a = t.parameter(Matrix::Ones(2, 2));
  const Var r = t.reduce(a, 1.0);
  EXPECT_THROW(t.backward(a), ShapeError);
  t.backward(r);
  EXPECT_THROW(t.backward(r), Error);
  Tape u;
  EXPECT_THROW(u.product(u.constant(Matrix::Ones(2, 2)), u.constant(Matrix::Ones(2, 3))), ShapeError);
  EXPECT_THROW(u.affine(u.constant(Matrix::Ones(2, 2)), u.constant(Matrix::Ones(3, 3))), ShapeError);
  EXPECT_THROW(u.relu_power(u.constant(Matrix::Ones(1, 1)), 3), DomainError);
}

TEST(Autodiff, ReplayIsBitwiseDeterministic) {
  const Network net = random_init({3, 8, 1.0, {2}, std::nullopt}, 2, 7);
  const PdeProblem prob = make_problem("sine-2d", 5.0);
  const EnergyBatch batch = EnergyBatch::make(sample_batch(64, 64, 2, 3), prob);
  const auto a = energy_value_and_gradient(net, batch, prob.lambda);
  const auto b = energy_value_and_gradient(net, batch, prob.lambda);
  EXPECT_EQ(a.value, b.value);
  EXPECT_TRUE((ad::flatten(a.gradient).array() == ad::flatten(b.gradient).array()).all());
}

TEST(Autodiff, FlattenRoundTrip) {
  const ParameterSet p = {Matrix::Random(3, 2), Matrix::Random(1, 5)};
  const ParameterSet q = ad::unflatten(ad::flatten(p), p);
  EXPECT_EQ(ad::parameter_count(p), 11u);
  EXPECT_TRUE(p[0] == q[0] && p[1] == q[1]);
  EXPECT_THROW(ad::unflatten(Vector::Zero(3), p), ShapeError);
}
