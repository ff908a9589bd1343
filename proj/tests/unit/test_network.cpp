#include <gtest/gtest.h>

#include <cmath>

#include "drm/errors.hpp"
#include "drm/network.hpp"
#include "drm/network_io.hpp"
#include "drm/rng.hpp"

using namespace drm;

namespace {

Network single_unit_relu2() {
  return Network(1, {Layer(Matrix::Ones(1, 1), Vector::Zero(1), Activation::Relu2),
                     Layer(Matrix::Ones(1, 1), Vector::Zero(1), Activation::Identity)});
}

Network random_net(int depth, int width, int d, std::uint64_t seed) {
  Network net = random_init({depth, width, 1.0, {2}, std::nullopt}, d, seed);
  // Non-zero biases so that kinks are not all at the origin.
  auto params = net.parameters();
  CounterRng rng(seed, 99);
  auto c = rng.cursor();
  for (std::size_t k = 1; k < params.size(); k += 2) {
    for (Eigen::Index i = 0; i < params[k].size(); ++i) params[k].data()[i] = c.uniform(-0.5, 0.5);
  }
  return net.with_parameters(params);
}

// Smallest |pre-activation| over all hidden units at x.
double min_preactivation(const Network& net, const Vector& x) {
  Matrix h = x;
  double m = INFINITY;
  for (std::size_t k = 0; k + 1 < net.layers().size(); ++k) {
    const Layer& l = net.layers()[k];
    Matrix z = l.weights * h;
    z.colwise() += l.bias;
    m = std::min(m, z.cwiseAbs().minCoeff());
    h = l.apply(h);
  }
  return m;
}

}  // namespace

TEST(Network, AffineForward) {
  const Network net(1, {Layer(Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 1.0), Activation::Identity)});
  const double x = 3.0;
  EXPECT_DOUBLE_EQ(net.forward(std::span<const double>(&x, 1)), 7.0);
}

TEST(Network, InactiveReluSquared) {
  const double x = -2.0;
  EXPECT_EQ(single_unit_relu2().forward(std::span<const double>(&x, 1)), 0.0);
}

TEST(Network, ShapeErrors) {
  const Network net = random_net(2, 4, 2, 0);
  const double x[3] = {0.1, 0.2, 0.3};
  EXPECT_THROW(net.forward(std::span<const double>(x, 3)), ShapeError);
  EXPECT_THROW(Network(2, {Layer(Matrix::Ones(1, 3), Vector::Zero(1), Activation::Identity)}), ShapeError);
  EXPECT_THROW(Network(1, {Layer(Matrix::Ones(1, 1), Vector::Zero(1), Activation::Relu2)}), ShapeError);
  EXPECT_THROW(Layer(Matrix::Ones(2, 1), Vector::Zero(3), Activation::Relu), ShapeError);
  EXPECT_THROW(Layer(Matrix::Constant(1, 1, INFINITY), Vector::Zero(1), Activation::Relu), DomainError);
}

TEST(Network, DepthWidthAccounting) {
  const Network net = random_init({4, 7, 1.0, {2}, std::nullopt}, 3, 1);
  EXPECT_EQ(net.depth(), 4);
  EXPECT_EQ(net.width(), 7);
  EXPECT_EQ(net.parameter_count(), static_cast<std::size_t>(7 * 4 + 7 * 8 * 2 + 8));
}

TEST(Gadgets, ExactIdentities) {
  const double a[2] = {3.0, -2.0};
  EXPECT_DOUBLE_EQ(product_gadget().forward(std::span<const double>(a, 2)), -6.0);
  const double s = -2.0;
  EXPECT_DOUBLE_EQ(square_gadget().forward(std::span<const double>(&s, 1)), 4.0);
}

TEST(Gadgets, ProductMatchesMultiplication) {
  const Network g = product_gadget();
  CounterRng rng(3);
  auto c = rng.cursor();
  PointSet p(2, 10000);
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    p(0, k) = c.uniform(-10.0, 10.0);
    p(1, k) = c.uniform(-10.0, 10.0);
  }
  const Vector out = g.forward(p);
  for (Eigen::Index k = 0; k < p.cols(); ++k) {
    const double ab = p(0, k) * p(1, k);
    ASSERT_LE(std::abs(out(k) - ab), 1e-12 * std::max(1.0, std::abs(ab)));
  }
}

TEST(DerivativeNetwork, SingleUnit) {
  const Network d = build_derivative_network(single_unit_relu2(), 0);
  const double x = 2.0;
  EXPECT_DOUBLE_EQ(d.forward(std::span<const double>(&x, 1)), 4.0);
  EXPECT_EQ(d.depth(), 4);
}

TEST(DerivativeNetwork, MatchesFiniteDifferences) {
  const Network net = random_net(3, 8, 2, 0);
  CounterRng rng(17);
  auto c = rng.cursor();
  int checked = 0;
  for (int coord = 0; coord < 2; ++coord) {
    const Network dnet = build_derivative_network(net, coord);
    std::vector<double> got, fd;
    while (static_cast<int>(got.size()) < 1000) {
      Vector x(2);
      x << c.open01(), c.open01();
      if (min_preactivation(net, x) < 1e-3) continue;
      got.push_back(dnet.forward(std::span<const double>(x.data(), 2)));
      Vector xp = x, xm = x;
      xp(coord) += 1e-6;
      xm(coord) -= 1e-6;
      fd.push_back((net.forward(std::span<const double>(xp.data(), 2)) -
                    net.forward(std::span<const double>(xm.data(), 2))) / 2e-6);
    }
    const Eigen::Map<Vector> g(got.data(), 1000), f(fd.data(), 1000);
    EXPECT_LE((g - f).cwiseAbs().maxCoeff() / f.cwiseAbs().maxCoeff(), 1e-6);
    checked += 1000;
  }
  EXPECT_EQ(checked, 2000);
}

TEST(DerivativeNetwork, AgreesWithTangentPropagation) {
  for (int depth = 1; depth <= 6; ++depth) {
    const Network net = random_net(depth, 5, 3, static_cast<std::uint64_t>(depth));
    const PointSet x = PointSet::Random(3, 50).array() * 0.5 + 0.5;
    const NetworkJet jet = evaluate_with_gradient(net, x);
    for (int i = 0; i < 3; ++i) {
      const Vector di = build_derivative_network(net, i).forward(x);
      EXPECT_LE((di - jet.gradient.row(i).transpose()).cwiseAbs().maxCoeff(),
                1e-10 * std::max(1.0, di.cwiseAbs().maxCoeff()))
          << "depth " << depth << " coordinate " << i;
    }
  }
}

TEST(DerivativeNetwork, Bookkeeping) {
  {
    const Network net = random_net(3, 8, 2, 0);
    const Network d = build_derivative_network(net, 1);
    EXPECT_EQ(d.depth(), 5);
    EXPECT_LE(d.width(), 40);
    const Network g = build_gradnorm_network(net);
    EXPECT_EQ(g.depth(), 6);
    EXPECT_LE(g.width(), 80);
  }
  for (int depth = 1; depth <= 7; ++depth) {
    for (int width : {1, 2, 3, 8}) {
      for (int d = 1; d <= 3; ++d) {
        const Network net = random_net(depth, width, d, 3);
        const int D = net.depth(), W = net.width();
        for (int i = 0; i < d; ++i) {
          const Network dn = build_derivative_network(net, i);
          EXPECT_EQ(dn.depth(), D + 2);
          EXPECT_LE(dn.width(), (D + 2) * W);
        }
        const Network g = build_gradnorm_network(net);
        EXPECT_EQ(g.depth(), D + 3);
        EXPECT_LE(g.width(), d * (D + 2) * W);
      }
    }
  }
}

TEST(DerivativeNetwork, RejectsUnsupportedActivation) {
  const Network relu(1, {Layer(Matrix::Ones(2, 1), Vector::Zero(2), Activation::Relu),
                         Layer(Matrix::Ones(1, 2), Vector::Zero(1), Activation::Identity)});
  EXPECT_THROW(build_derivative_network(relu, 0), ConstructionError);
  EXPECT_THROW(build_gradnorm_network(relu), ConstructionError);
  EXPECT_THROW(build_derivative_network(single_unit_relu2(), 1), ConstructionError);
}

TEST(GradnormNetwork, SingleUnit) {
  const double x = 1.0;
  EXPECT_DOUBLE_EQ(build_gradnorm_network(single_unit_relu2()).forward(std::span<const double>(&x, 1)), 4.0);
}

TEST(GradnormNetwork, EqualsSumOfSquaredDerivatives) {
  const Network net = random_net(3, 6, 3, 4);
  const PointSet x = PointSet::Random(3, 200).array() * 0.5 + 0.5;
  Vector expect = Vector::Zero(200);
  for (int i = 0; i < 3; ++i) expect += build_derivative_network(net, i).forward(x).cwiseAbs2();
  const Vector got = build_gradnorm_network(net).forward(x);
  EXPECT_LE((got - expect).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
}

TEST(Network, PositiveHomogeneityOfBiasFreeRelu) {
  Network net = random_init({3, 6, 1.0, {1}, std::nullopt}, 2, 9);
  const PointSet x = PointSet::Random(2, 20);
  const Vector a = net.forward(x);
  const Vector b = net.forward(PointSet(2.5 * x));
  EXPECT_LE((b - 2.5 * a).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));
}

TEST(Network, RandomInitFollowsSpec) {
  FunctionClassSpec spec{3, 10, 1.0, {2}, std::vector<int>{10, 4, 1}};
  const Network net = random_init(spec, 2, 42);
  ASSERT_EQ(net.depth(), 3);
  EXPECT_EQ(net.layers()[0].out_dim(), 10);
  EXPECT_EQ(net.layers()[1].out_dim(), 4);
  int fan_in = 2;
  for (const Layer& l : net.layers()) {
    const double r = std::sqrt(6.0 / (fan_in + l.out_dim()));
    EXPECT_LE(l.weights.cwiseAbs().maxCoeff(), r);
    EXPECT_EQ(l.bias.cwiseAbs().maxCoeff(), 0.0);
    fan_in = static_cast<int>(l.out_dim());
  }
  EXPECT_EQ(net.layers()[0].uniform_activation(), Activation::Relu2);
  EXPECT_EQ(net.layers()[2].uniform_activation(), Activation::Identity);
  const Network again = random_init(spec, 2, 42);
  EXPECT_TRUE(ad::flatten(net.parameters()) == ad::flatten(again.parameters()));
  const Network other = random_init(spec, 2, 43);
  EXPECT_FALSE(ad::flatten(net.parameters()) == ad::flatten(other.parameters()));
}

TEST(Network, ClassSpecValidation) {
  EXPECT_THROW((FunctionClassSpec{0, 1, 1.0, {2}, std::nullopt}.validate()), DomainError);
  EXPECT_THROW((FunctionClassSpec{2, 4, 0.0, {2}, std::nullopt}.validate()), DomainError);
  EXPECT_THROW((FunctionClassSpec{2, 4, 1.0, {3}, std::nullopt}.validate()), DomainError);
  EXPECT_THROW((FunctionClassSpec{2, 4, 1.0, {2}, std::vector<int>{3, 1}}.validate()), DomainError);
  EXPECT_THROW((FunctionClassSpec{2, 4, 1.0, {2}, std::vector<int>{4}}.validate()), DomainError);
}

TEST(Network, ParallelSum) {
  const Network a = random_net(3, 4, 2, 1), b = random_net(3, 5, 2, 2);
  const std::vector<Network> nets = {a, b};
  const std::vector<double> s = {2.0, -0.5};
  const Network sum = parallel_sum(nets, s);
  const PointSet x = PointSet::Random(2, 30);
  EXPECT_LE((sum.forward(x) - 2.0 * a.forward(x) + 0.5 * b.forward(x)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(sum.depth(), 3);
  EXPECT_EQ(sum.width(), 9);
  const std::vector<Network> mixed = {a, random_net(2, 4, 2, 1)};
  EXPECT_THROW(parallel_sum(mixed, s), ConstructionError);
}

TEST(NetworkJson, RoundTripIsExact) {
  const Network net = random_net(3, 5, 2, 8);
  const Network back = network_from_json(nlohmann::json::parse(network_to_json(net).dump()));
  EXPECT_TRUE(ad::flatten(net.parameters()) == ad::flatten(back.parameters()));
  const Network dn = build_derivative_network(net, 0);
  const Network dback = network_from_json(network_to_json(dn));
  EXPECT_EQ(dback.layers()[0].activations, dn.layers()[0].activations);
  const PointSet x = PointSet::Random(2, 10);
  EXPECT_TRUE(dn.forward(x) == dback.forward(x));
}

TEST(NetworkJson, FlatWeightsAndErrors) {
  const auto j = nlohmann::json::parse(
      R"({"input_dim":2,"layers":[{"weights":[1,2,3,4],"bias":[0,1],"activation":"relu2"},
                                   {"weights":[[1,-1]],"bias":[0],"activation":"identity"}]})");
  const Network net = network_from_json(j);
  EXPECT_EQ(net.layers()[0].weights(1, 0), 3.0);
  auto bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(network_from_json(bad), ConfigError);
  auto bad_act = j;
  bad_act["layers"][0]["activation"] = "tanh";
  EXPECT_THROW(network_from_json(bad_act), ConfigError);
  auto bad_shape = j;
  bad_shape["layers"][0]["weights"] = {1, 2, 3};
  EXPECT_THROW(network_from_json(bad_shape), ShapeError);
}
