#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "drm/complexity.hpp"
#include "drm/errors.hpp"
#include "drm/rng.hpp"
#include "oracles.hpp"

using namespace drm;

namespace {

/// Largest m <= limit with ln(prod_i 2 (2 e m k_i (1 + (i-1) 2^(i-1)) / M_i)^(M_i)) >= m ln 2, by linear scan.
std::int64_t pdim_by_scan(const std::vector<int>& widths, int d_in, std::int64_t limit) {
  std::vector<double> M, k;
  double cum = 0.0, prev = d_in;
  for (int w : widths) {
    cum += w * (prev + 1.0);
    M.push_back(cum);
    k.push_back(w);
    prev = w;
  }
  std::int64_t best = 0;
  for (std::int64_t m = 1; m <= limit; ++m) {
    long double lhs = 0.0L;
    for (std::size_t i = 0; i < M.size(); ++i) {
      const long double deg = 1.0L + i * std::pow(2.0L, static_cast<long double>(i));
      lhs += std::log(2.0L) + M[i] * std::log(2.0L * std::numbers::e_v<long double> * m * k[i] * deg / M[i]);
    }
    if (lhs >= m * std::log(2.0L)) best = m;
  }
  return best;
}

Network random_net(int d, std::uint64_t seed, int depth, int width) {
  FunctionClassSpec spec;
  spec.depth = depth;
  spec.width = width;
  return random_init(spec, d, seed);
}

}  // namespace

TEST(Pdim, AffineLineIsAtLeastTwo) {
  const std::vector<int> w{1};
  const std::int64_t p = pdim_bound(w, 1);
  EXPECT_GE(p, 2);
  EXPECT_EQ(p, pdim_by_scan(w, 1, 1000));
}

TEST(Pdim, MatchesIndependentScan) {
  for (const auto& w : std::vector<std::vector<int>>{{8, 8, 1}, {2, 1}, {4, 4, 4, 1}, {3, 1}}) {
    for (int d : {1, 2}) EXPECT_EQ(pdim_bound(w, d), pdim_by_scan(w, d, 200000)) << w.size() << " " << d;
  }
}

TEST(Pdim, Monotone) {
  const std::vector<int> a{16, 16, 1}, b{32, 32, 1}, c{16, 16, 16, 1};
  EXPECT_LE(pdim_bound(a, 1), pdim_bound(b, 1));
  EXPECT_LE(pdim_bound(a, 1), pdim_bound(c, 1));
  EXPECT_LE(pdim_bound(a, 1), pdim_bound(a, 3));
  EXPECT_THROW(pdim_bound(std::vector<int>{}, 1), DomainError);
  EXPECT_THROW(pdim_bound(std::vector<int>{0, 1}, 1), DomainError);
}

TEST(Pdim, GradNormClassWidths) {
  const std::vector<int> w = gradnorm_class_widths(3, 16, 2);
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w.front(), 2 * 5 * 16);
  EXPECT_EQ(w.back(), 1);
}

TEST(Covering, Algebra) {
  EXPECT_NEAR(log_covering_bound(std::numbers::e * 1000.0 * 2.0 / 40.0, 1000.0, 2.0, 40), 0.0, 1e-12);
  const double a = log_covering_bound(0.05, 1e4, 1.0, 30);
  const double b = log_covering_bound(0.1, 1e4, 1.0, 30);
  EXPECT_NEAR(a - b, 30.0 * std::log(2.0), 1e-10);
  const double direct = 50.0 * std::log(std::numbers::e * 1e3 * 1.0 / (0.1 * 50.0));
  EXPECT_NEAR(log_covering_bound(0.1, 1e3, 1.0, 50), direct, 1e-10);
  EXPECT_NEAR(covering_bound(1.0, 100.0, 1.0, 2), std::pow(std::numbers::e * 100.0 / 2.0, 2), 1e-8);
  EXPECT_THROW(log_covering_bound(0.1, 10.0, 1.0, 50), DomainError);
  EXPECT_THROW(log_covering_bound(0.0, 100.0, 1.0, 5), DomainError);
}

TEST(Rademacher, ClosedFormAndScaling) {
  const double direct = 28.0 * std::sqrt(1.5) * 2.0 * std::sqrt(100.0 / 1e4) * std::sqrt(std::log(std::numbers::e * 1e4 / 100.0));
  EXPECT_NEAR(rademacher_bound(1e4, 2.0, 100), direct, 1e-12);
  EXPECT_NEAR(rademacher_bound(1e4, 6.0, 100) / rademacher_bound(1e4, 2.0, 100), 3.0, 1e-14);
  const double r1 = rademacher_bound(1e4, 1.0, 100), r4 = rademacher_bound(4e4, 1.0, 100);
  const double log_ratio = std::sqrt(std::log(std::numbers::e * 4e4 / 100.0) / std::log(std::numbers::e * 1e4 / 100.0));
  EXPECT_NEAR(r4 / r1, 0.5 * log_ratio, 1e-14);
  for (double n = 200; n < 1e8; n *= 3) EXPECT_LT(rademacher_bound(3 * n, 1.0, 100), rademacher_bound(n, 1.0, 100));
  EXPECT_THROW(rademacher_bound(10.0, 1.0, 100), DomainError);
  EXPECT_THROW(rademacher_bound(100.0, 1.0, 0), DomainError);
}

TEST(StatisticalBound, Assembly) {
  const StatisticalBound s = statistical_error_bound(3, 16, 1, 4096, 10.0, 1.0, 1.0);
  auto rad = [](double n, std::int64_t p) { return n < p ? 1.0 : rademacher_bound(n, 1.0, p); };
  const double r2 = rad(4096, s.pdim_n2), r12 = rad(4096, s.pdim_n12);
  EXPECT_EQ(s.pdim_n2, pdim_bound(std::vector<int>{16, 16, 1}, 1));
  EXPECT_EQ(s.pdim_n12, pdim_bound(gradnorm_class_widths(3, 16, 1), 1));
  EXPECT_NEAR(s.value, 2.0 * r12 + 2.0 * 4.0 * r2 + 2.0 * r2 * 10.0, 1e-12);
  EXPECT_EQ(s.vacuous, 4096 < s.pdim_n2 || 4096 < s.pdim_n12);
  EXPECT_TRUE(std::isfinite(s.value));
  EXPECT_GT(s.value, 0.0);
}

TEST(StatisticalBound, Monotonicity) {
  const double n = 1e12;
  const StatisticalBound base = statistical_error_bound(3, 8, 1, n, 10.0, 1.0, 2.0);
  ASSERT_FALSE(base.vacuous);
  const StatisticalBound zero = statistical_error_bound(3, 8, 1, n, 0.0, 1.0, 2.0);
  EXPECT_NEAR(base.value - zero.value, 2.0 * 4.0 * base.rademacher_n2 * 10.0, 1e-12 * base.value);
  EXPECT_NEAR(zero.value, 2.0 * zero.rademacher_n12 + 2.0 * (8.0 + 4.0) * zero.rademacher_n2, 1e-12 * zero.value);
  EXPECT_GT(statistical_error_bound(3, 8, 1, n, 20.0, 1.0, 2.0).value, base.value);
  EXPECT_GT(statistical_error_bound(3, 16, 1, n, 10.0, 1.0, 2.0).value, base.value);
  EXPECT_GT(statistical_error_bound(4, 8, 1, n, 10.0, 1.0, 2.0).value, base.value);
  EXPECT_GT(statistical_error_bound(3, 8, 1, n, 10.0, 2.0, 2.0).value, base.value);
  EXPECT_LT(statistical_error_bound(3, 8, 1, 10 * n, 10.0, 1.0, 2.0).value, base.value);
}

TEST(StatisticalBound, VacuousRegimeUsesTrivialBound) {
  const StatisticalBound s = statistical_error_bound(3, 16, 1, 10.0, 10.0, 1.0, 1.0);
  EXPECT_TRUE(s.vacuous);
  EXPECT_EQ(s.rademacher_n2, 1.0);
  EXPECT_EQ(s.rademacher_n12, 1.0);
  EXPECT_DOUBLE_EQ(s.value, 2.0 + 8.0 + 20.0);
}

TEST(EmpiricalRademacher, ZeroAndConstant) {
  const PointSet z = sample_interior(256, 1, 0);
  const std::vector<Network> zero{Network(1, {Layer(Matrix::Zero(1, 1), Vector::Zero(1), Activation::Identity)})};
  EXPECT_EQ(empirical_rademacher(zero, z, 100, 0).mean, 0.0);

  const double c = 1.7;
  const std::vector<Network> constant{Network(1, {Layer(Matrix::Zero(1, 1), Vector::Constant(1, c), Activation::Identity)})};
  const MonteCarloEstimate e = empirical_rademacher(constant, z, 4000, 1);
  const double exact = c * drm::testing::mean_abs_rademacher_sum(256);
  EXPECT_LE(std::abs(e.mean - exact), 3.0 * e.std_error);
  EXPECT_NEAR(exact, c * std::sqrt(2.0 / (std::numbers::pi * 256)), 0.01 * exact);
}

TEST(EmpiricalRademacher, DominatedByBound) {
  const int n = 256;
  const PointSet z = sample_interior(n, 1, 2);
  std::vector<Network> nets;
  double measured = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    nets.push_back(random_net(1, s, 2, 2));
    measured = std::max(measured, nets.back().forward(z).cwiseAbs().maxCoeff());
  }
  const std::int64_t pdim = pdim_bound(std::vector<int>{2, 1}, 1);
  ASSERT_LE(pdim, n);
  const MonteCarloEstimate e = empirical_rademacher(nets, z, 500, 3);
  EXPECT_GT(e.mean, 0.0);
  EXPECT_LE(e.mean, rademacher_bound(n, measured, pdim));
  EXPECT_THROW(empirical_rademacher(std::vector<Network>{}, z, 10, 0), DomainError);
}

TEST(GeneralizationGap, ConstantNetworkClosedForm) {
  const PdeProblem p = make_problem("sine-1d", 4.0);
  const double c = 0.8;
  const Network net(1, {Layer(Matrix::Zero(1, 1), Vector::Constant(1, c), Activation::Identity)});
  const CubeQuadrature q = CubeQuadrature::make(1);
  const MonteCarloEstimate e = empirical_generalization_gap(net, p, 4.0, 64, 5, q, 9);
  // Only the source term fluctuates: gap = c |mean f(X) - int f|.
  const CounterRng rng(9, 5);
  const double int_f = 2.0 * (std::numbers::pi * std::numbers::pi + 1.0) / std::numbers::pi;
  double mean = 0.0;
  for (int r = 0; r < 5; ++r) {
    const PointSet x = sample_interior(64, 1, rng.bits(static_cast<std::uint64_t>(r)));
    mean += c * std::abs(p.f(x).mean() - int_f) / 5.0;
  }
  EXPECT_NEAR(e.mean, mean, 1e-12);
}

TEST(GeneralizationGap, DecaysLikeInverseSqrt) {
  const PdeProblem p = make_problem("sine-1d", 10.0);
  const Network net = random_net(1, 0, 3, 8);
  const CubeQuadrature q = CubeQuadrature::make(1);
  std::vector<double> lx, ly;
  for (std::size_t n : {256u, 1024u, 4096u}) {
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(empirical_generalization_gap(net, p, 10.0, n, 200, q, 4).mean));
  }
  const double slope = (ly[2] - ly[0]) / (lx[2] - lx[0]);
  EXPECT_GE(slope, -0.65);
  EXPECT_LE(slope, -0.35);
}

TEST(Report, JsonMirrorsFields) {
  ComplexityInputs in;
  in.n = 1e9;
  const ComplexityReport r = make_complexity_report(in);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("pdim_bound").get<std::int64_t>(), r.pdim_bound);
  EXPECT_EQ(j.at("covering_bound_at").size(), 2u);
  EXPECT_EQ(j.at("inputs").at("width").get<int>(), 16);
  EXPECT_FALSE(j.at("statistical_detail").at("vacuous").get<bool>());
  EXPECT_GT(j.at("statistical_error_bound").get<double>(), 0.0);
}
