#include "drm/complexity.hpp"

#include <cmath>
#include <numbers>

#include "drm/energy.hpp"
#include "drm/errors.hpp"
#include "drm/rng.hpp"

namespace drm {

namespace {

struct GrowthTerms {
  std::vector<long double> M;     // cumulative parameter counts
  std::vector<long double> coef;  // 2 e k_i (1 + (i-1) 2^(i-1)) / M_i
};

// log2 of the growth bound minus m.
long double excess(const GrowthTerms& g, long double m) {
  long double s = -m;
  for (std::size_t i = 0; i < g.M.size(); ++i) s += 1.0L + g.M[i] * std::log2(g.coef[i] * m);
  return s;
}

}  // namespace

std::int64_t pdim_bound(std::span<const int> layer_widths, int d_in) {
  if (d_in < 1) throw DomainError("pdim_bound: input dimension must be >= 1");
  if (layer_widths.empty()) throw DomainError("pdim_bound: depth must be >= 1");
  GrowthTerms g;
  long double cumulative = 0.0L;
  long double prev = d_in;
  for (std::size_t i = 0; i < layer_widths.size(); ++i) {
    const long double k = layer_widths[i];
    if (k < 1) throw DomainError("pdim_bound: widths must be positive");
    cumulative += k * (prev + 1.0L);
    const long double degree = 1.0L + static_cast<long double>(i) * std::ldexp(1.0L, static_cast<int>(i));
    g.M.push_back(cumulative);
    g.coef.push_back(2.0L * std::numbers::e_v<long double> * k * degree / cumulative);
    prev = k;
  }
  // excess(m) is concave with its maximum at sum(M) / ln 2.
  long double total = 0.0L;
  for (long double v : g.M) total += v;
  const long double peak = std::max(1.0L, std::floor(total / std::numbers::ln2_v<long double>));
  if (excess(g, peak) < 0.0L) return 0;
  long double lo = peak, hi = 2.0L * peak;
  while (excess(g, hi) >= 0.0L) {
    lo = hi;
    hi *= 2.0L;
  }
  while (hi - lo > 1.0L) {
    const long double mid = std::floor((lo + hi) / 2.0L);
    if (excess(g, mid) >= 0.0L) lo = mid;
    else hi = mid;
  }
  return static_cast<std::int64_t>(lo);
}

std::vector<int> gradnorm_class_widths(int depth, int width, int d) {
  if (depth < 1 || width < 1 || d < 1) throw DomainError("class widths: depth, width and d must be positive");
  std::vector<int> w(static_cast<std::size_t>(depth + 3), d * (depth + 2) * width);
  w.back() = 1;
  return w;
}

double log_covering_bound(double eps, double n, double bound, std::int64_t pdim) {
  if (!(eps > 0.0) || !(bound > 0.0) || pdim < 1) throw DomainError("covering bound: eps, B, pdim must be positive");
  if (n < static_cast<double>(pdim)) throw DomainError("covering bound: requires n >= pdim");
  const double p = static_cast<double>(pdim);
  return p * std::log(std::numbers::e * n * bound / (eps * p));
}

double covering_bound(double eps, double n, double bound, std::int64_t pdim) {
  return std::exp(log_covering_bound(eps, n, bound, pdim));
}

double rademacher_bound(double n, double bound, std::int64_t pdim) {
  if (pdim < 1) throw DomainError("rademacher bound: pdim must be >= 1");
  if (!(bound > 0.0)) throw DomainError("rademacher bound: B must be positive");
  const double p = static_cast<double>(pdim);
  if (n < p) throw DomainError("rademacher bound: requires n >= pdim");
  return 28.0 * std::sqrt(1.5) * bound * std::sqrt(p / n) * std::sqrt(std::log(std::numbers::e * n / p));
}

StatisticalBound statistical_error_bound(int depth, int width, int d, double n, double lambda, double bound,
                                         double c3) {
  if (lambda < 0.0 || c3 < 0.0) throw DomainError("statistical bound: lambda and c3 must be non-negative");
  if (!(n >= 1.0)) throw DomainError("statistical bound: n must be >= 1");
  FunctionClassSpec spec{depth, width, bound, {2}, std::nullopt};
  spec.validate();
  StatisticalBound s;
  const std::vector<int> w2 = spec.resolved_widths();
  const std::vector<int> w12 = gradnorm_class_widths(depth, width, d);
  s.pdim_n2 = pdim_bound(w2, d);
  s.pdim_n12 = pdim_bound(w12, d);
  auto rad = [&](std::int64_t p) {
    if (n < static_cast<double>(p)) {
      s.vacuous = true;
      return bound;
    }
    return rademacher_bound(n, bound, p);
  };
  s.rademacher_n2 = rad(s.pdim_n2);
  s.rademacher_n12 = rad(s.pdim_n12);
  s.value = 2.0 * s.rademacher_n12 + 2.0 * (2.0 * c3 * c3 + 2.0 * c3) * s.rademacher_n2 +
            2.0 * c3 * c3 * s.rademacher_n2 * lambda;
  return s;
}

MonteCarloEstimate empirical_rademacher(std::span<const Network> nets, const PointSet& points, int trials,
                                        std::uint64_t seed) {
  if (nets.empty()) throw DomainError("empirical rademacher: no networks");
  if (trials < 2) throw DomainError("empirical rademacher: at least two trials required");
  const Eigen::Index n = points.cols();
  if (n < 1) throw EmptyBatchError("empirical rademacher: no points");
  Matrix values(static_cast<Eigen::Index>(nets.size()), n);
  for (std::size_t k = 0; k < nets.size(); ++k) values.row(static_cast<Eigen::Index>(k)) = nets[k].forward(points).transpose();

  const CounterRng rng(seed, 4);
  Vector sigma(n);
  Vector sup(trials);
  for (int t = 0; t < trials; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) {
      sigma(i) = (rng.bits(static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(n) + i) >> 63) ? 1.0 : -1.0;
    }
    sup(t) = (values * sigma).cwiseAbs().maxCoeff() / static_cast<double>(n);
  }
  MonteCarloEstimate e;
  e.mean = sup.mean();
  e.std_error = std::sqrt((sup.array() - e.mean).square().sum() / (trials - 1) / trials);
  return e;
}

MonteCarloEstimate empirical_generalization_gap(const Network& net, const PdeProblem& prob, double lambda,
                                                std::size_t n, int repeats, const CubeQuadrature& quad,
                                                std::uint64_t seed) {
  if (repeats < 2) throw DomainError("generalization gap: at least two repeats required");
  const PdeProblem p = prob.with_lambda(lambda);
  const Field u = network_field(net);
  const double exact = continuous_energy(u, p, quad).total;
  const CounterRng rng(seed, 5);
  Vector gaps(repeats);
  for (int r = 0; r < repeats; ++r) {
    const SampleBatch b = sample_batch(n, n, p.dim, rng.bits(static_cast<std::uint64_t>(r)));
    gaps(r) = std::abs(exact - discrete_energy(u, b, p).total);
  }
  MonteCarloEstimate e;
  e.mean = gaps.mean();
  e.std_error = std::sqrt((gaps.array() - e.mean).square().sum() / (repeats - 1) / repeats);
  return e;
}

ComplexityReport make_complexity_report(const ComplexityInputs& in) {
  ComplexityReport r;
  r.inputs = in;
  r.statistical = statistical_error_bound(in.depth, in.width, in.d, in.n, in.lambda, in.bound, in.c3);
  r.pdim_bound = r.statistical.pdim_n2;
  r.rademacher_bound = r.statistical.rademacher_n2;
  if (in.n >= static_cast<double>(r.pdim_bound)) {
    for (double eps : in.covering_eps) r.log_covering.emplace_back(eps, log_covering_bound(eps, in.n, in.bound, r.pdim_bound));
  }
  return r;
}

nlohmann::json to_json(const ComplexityReport& r) {
  nlohmann::json cover = nlohmann::json::array();
  for (const auto& [eps, lc] : r.log_covering) cover.push_back({{"eps", eps}, {"log_covering_bound", lc}});
  const auto& s = r.statistical;
  return {{"inputs",
           {{"depth", r.inputs.depth},
            {"width", r.inputs.width},
            {"d", r.inputs.d},
            {"n", r.inputs.n},
            {"lambda", r.inputs.lambda},
            {"bound", r.inputs.bound},
            {"c3", r.inputs.c3}}},
          {"pdim_bound", r.pdim_bound},
          {"rademacher_bound", r.rademacher_bound},
          {"covering_bound_at", cover},
          {"statistical_error_bound", s.value},
          {"statistical_detail",
           {{"pdim_n2", s.pdim_n2},
            {"pdim_n12", s.pdim_n12},
            {"rademacher_n2", s.rademacher_n2},
            {"rademacher_n12", s.rademacher_n12},
            {"vacuous", s.vacuous}}}};
}

}  // namespace drm
