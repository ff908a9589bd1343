#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "drm/network.hpp"
#include "drm/pde.hpp"

namespace drm {

/// Largest m with prod_i 2 (2 e m k_i (1 + (i-1) 2^(i-1)) / M_i)^(M_i) >= 2^m,
/// where k_i is the size of layer i (the output layer included) and M_i the
/// number of parameters feeding layers 1..i. Evaluated in log space.
std::int64_t pdim_bound(std::span<const int> layer_widths, int d_in);

/// Layer widths of the mixed-activation class holding |grad u|^2 for
/// u in N^2_{D,W}: depth D + 3, hidden widths d (D + 2) W.
std::vector<int> gradnorm_class_widths(int depth, int width, int d);

/// log of (e n B / (eps pdim))^pdim; requires n >= pdim.
double log_covering_bound(double eps, double n, double bound, std::int64_t pdim);
double covering_bound(double eps, double n, double bound, std::int64_t pdim);

/// 28 sqrt(3/2) B sqrt(pdim / n) sqrt(log(e n / pdim)); requires n >= pdim >= 1.
double rademacher_bound(double n, double bound, std::int64_t pdim);

struct StatisticalBound {
  double value = 0.0;
  std::int64_t pdim_n2 = 0;
  std::int64_t pdim_n12 = 0;
  double rademacher_n2 = 0.0;
  double rademacher_n12 = 0.0;
  /// True when n < pdim for some class; that class then uses the trivial
  /// bound R <= B and the result carries no rate information.
  bool vacuous = false;
};

/// 2 R(N^{1,2}) + 2 (2 c3^2 + 2 c3) R(N^2) + 2 c3^2 R(N^2) lambda.
StatisticalBound statistical_error_bound(int depth, int width, int d, double n, double lambda, double bound,
                                         double c3);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// E_sigma max_k |1/n sum_i sigma_i u_k(Z_i)| over `trials` sign vectors.
MonteCarloEstimate empirical_rademacher(std::span<const Network> nets, const PointSet& points, int trials,
                                        std::uint64_t seed);

/// Mean |L_lambda(u) - L^_lambda(u)| over `repeats` fresh batches with n
/// interior and n boundary points.
MonteCarloEstimate empirical_generalization_gap(const Network& net, const PdeProblem& prob, double lambda,
                                                std::size_t n, int repeats, const CubeQuadrature& quad,
                                                std::uint64_t seed);

struct ComplexityInputs {
  int depth = 3;
  int width = 16;
  int d = 1;
  double n = 4096;
  double lambda = 10.0;
  double bound = 1.0;
  double c3 = 1.0;
  std::vector<double> covering_eps = {0.1, 0.01};
};

struct ComplexityReport {
  ComplexityInputs inputs;
  std::int64_t pdim_bound = 0;
  double rademacher_bound = 0.0;
  /// (eps, log covering bound) pairs; empty when n < pdim.
  std::vector<std::pair<double, double>> log_covering;
  StatisticalBound statistical;
};

ComplexityReport make_complexity_report(const ComplexityInputs& in);
nlohmann::json to_json(const ComplexityReport& r);

}  // namespace drm
