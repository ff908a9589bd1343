#include "drm/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "drm/bspline.hpp"
#include "drm/complexity.hpp"
#include "drm/errors.hpp"
#include "drm/network_io.hpp"
#include "drm/oracle.hpp"
#include "drm/pde.hpp"
#include "drm/rng.hpp"
#include "drm/trainer.hpp"
#include "schema.hpp"
#include "svg.hpp"

namespace drm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Context {
  fs::path out;
  bool plot = false;
  std::uint64_t seed = 0;
  CommandOutput result;

  fs::path file(const std::string& name) {
    fs::create_directories(out);
    fs::path p = out / name;
    result.files.push_back(p);
    return p;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::vector<double> number_list(const json& j, const char* key, const char* where) {
  std::vector<double> out;
  for (const json& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string(where) + ": '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  if (out.empty()) throw ConfigError(std::string(where) + ": '" + key + "' must not be empty");
  return out;
}

std::vector<std::int64_t> integer_list(const json& j, const char* key, const char* where) {
  std::vector<std::int64_t> out;
  for (const json& v : j.at(key)) {
    if (!v.is_number_integer()) throw ConfigError(std::string(where) + ": '" + key + "' must hold integers");
    out.push_back(v.get<std::int64_t>());
  }
  if (out.empty()) throw ConfigError(std::string(where) + ": '" + key + "' must not be empty");
  return out;
}

PdeProblem parse_problem(const json& j, std::optional<double> lambda) {
  if (j.is_string()) return make_problem(j.get<std::string>(), lambda.value_or(1.0));
  PdeProblem p = problem_from_json(j);
  if (lambda) p = p.with_lambda(*lambda);
  return p;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Field sine_target(int d) {
  using std::numbers::pi;
  return pointwise_field(
      [](const Eigen::Ref<const Vector>& x) {
        double p = 1.0;
        for (Eigen::Index j = 0; j < x.size(); ++j) p *= std::sin(pi * x(j));
        return p;
      },
      [d](const Eigen::Ref<const Vector>& x) {
        Vector g(d);
        for (int j = 0; j < d; ++j) {
          double p = pi * std::cos(pi * x(j));
          for (int k = 0; k < d; ++k) {
            if (k != j) p *= std::sin(pi * x(k));
          }
          g(j) = p;
        }
        return g;
      });
}

// ---------------------------------------------------------------- verify-constructions

void verify_constructions(const json& cfg, Context& ctx) {
  check_schema(cfg,
               {{"seed", Kind::Integer, true}, {"out", Kind::String}, {"d", Kind::Integer}, {"level", Kind::Integer},
                {"points", Kind::Integer}, {"depth", Kind::Integer}, {"width", Kind::Integer}, {"tamper", Kind::Boolean}},
               "verify-constructions");
  const int d = get_or(cfg, "d", 1);
  const int level = get_or(cfg, "level", 2);
  const int points = get_or(cfg, "points", 10000);
  const int depth = get_or(cfg, "depth", 3);
  const int width = get_or(cfg, "width", 8);
  const bool tamper = get_or(cfg, "tamper", false);
  require(d >= 1 && d <= 6, "verify-constructions: d must lie in 1..6");
  require(level >= 1 && level <= 6, "verify-constructions: level must lie in 1..6");
  require(points >= 1 && depth >= 1 && width >= 1, "verify-constructions: points, depth, width must be positive");

  const double spline_tol = 1e-9, network_tol = 1e-9, gadget_tol = 1e-12;
  const PointSet x = sample_interior(static_cast<std::size_t>(points), d, ctx.seed);

  // Every basis function of the level, plus one random combination.
  const int log_d = static_cast<int>(std::ceil(std::log2(static_cast<double>(d))));
  double spline_err = 0.0;
  bool spline_shapes = true;
  int checked = 0;
  std::vector<int> idx(static_cast<std::size_t>(d), -2);
  const int top = (1 << level) - 1;
  SplineCombination combo{level, d, {}};
  auto coef = CounterRng(ctx.seed, 6).cursor();
  while (true) {
    Network net = compile_to_network(DyadicSplineIndex{level, idx});
    if (tamper && checked == 0) {
      std::vector<Layer> layers = net.layers();
      layers.front().bias(0) += 1e-3;
      net = Network(d, std::move(layers));
    }
    spline_shapes = spline_shapes && net.depth() == log_d + 2 && net.width() <= 4 * d;
    const Vector v = net.forward(x);
    const DyadicSplineIndex di{level, idx};
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double ref = eval_multivariate(di, std::span<const double>(x.col(k).data(), static_cast<std::size_t>(d)));
      spline_err = std::max(spline_err, std::abs(v(k) - ref));
    }
    combo.coeffs[idx] = coef.uniform(-1.0, 1.0);
    ++checked;
    int j = 0;
    while (j < d && idx[static_cast<std::size_t>(j)] == top) idx[static_cast<std::size_t>(j++)] = -2;
    if (j == d) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  const Network combo_net = compile_combination(combo);
  const Vector cv = combo_net.forward(x);
  double combo_err = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    combo_err = std::max(combo_err,
                         std::abs(cv(k) - combo.eval(std::span<const double>(x.col(k).data(), static_cast<std::size_t>(d)))));
  }

  FunctionClassSpec spec;
  spec.depth = depth;
  spec.width = width;
  const Network net = random_init(spec, d, ctx.seed);
  const NetworkJet jet = evaluate_with_gradient(net, x);
  double deriv_err = 0.0;
  bool deriv_shapes = true;
  for (int i = 0; i < d; ++i) {
    const Network dn = build_derivative_network(net, i);
    deriv_shapes = deriv_shapes && dn.depth() == depth + 2 && dn.width() <= (depth + 2) * net.width();
    const Vector v = dn.forward(x);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      deriv_err = std::max(deriv_err, std::abs(v(k) - jet.gradient(i, k)) / std::max(1.0, std::abs(jet.gradient(i, k))));
    }
  }
  const Network gn = build_gradnorm_network(net);
  const bool grad_shapes = gn.depth() == depth + 3 && gn.width() <= d * (depth + 2) * net.width();
  const Vector gv = gn.forward(x);
  double grad_err = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double ref = jet.gradient.col(k).squaredNorm();
    grad_err = std::max(grad_err, std::abs(gv(k) - ref) / std::max(1.0, ref));
  }

  const Network prod = product_gadget();
  const Network sq = square_gadget();
  const CounterRng grng(ctx.seed, 7);
  double prod_err = 0.0, sq_err = 0.0;
  for (std::uint64_t k = 0; k < 10000; ++k) {
    const double a = grng.uniform(3 * k, -10.0, 10.0), b = grng.uniform(3 * k + 1, -10.0, 10.0);
    const double ab[2] = {a, b};
    prod_err = std::max(prod_err, std::abs(prod.forward(ab) - a * b) / std::max(1.0, std::abs(a * b)));
    const double c = grng.uniform(3 * k + 2, -10.0, 10.0);
    sq_err = std::max(sq_err, std::abs(sq.forward(std::span<const double>(&c, 1)) - c * c) / std::max(1.0, c * c));
  }

  const bool pass = spline_err <= spline_tol && combo_err <= spline_tol && deriv_err <= network_tol &&
                    grad_err <= network_tol && prod_err <= gadget_tol && sq_err <= gadget_tol && spline_shapes &&
                    deriv_shapes && grad_shapes;
  json report{
      {"command", "verify-constructions"},
      {"seed", ctx.seed},
      {"d", d},
      {"level", level},
      {"points", points},
      {"tampered", tamper},
      {"spline",
       {{"basis_functions", checked},
        {"max_abs_error", spline_err},
        {"combination_max_abs_error", combo_err},
        {"expected_depth", log_d + 2},
        {"width_limit", 4 * d},
        {"shapes_ok", spline_shapes}}},
      {"derivative",
       {{"network_depth", depth},
        {"network_width", net.width()},
        {"max_rel_error", deriv_err},
        {"expected_depth", depth + 2},
        {"width_limit", (depth + 2) * net.width()},
        {"shapes_ok", deriv_shapes}}},
      {"gradnorm",
       {{"max_rel_error", grad_err},
        {"depth", gn.depth()},
        {"width", gn.width()},
        {"expected_depth", depth + 3},
        {"width_limit", d * (depth + 2) * net.width()},
        {"shapes_ok", grad_shapes}}},
      {"gadgets", {{"product_max_rel_error", prod_err}, {"square_max_rel_error", sq_err}}},
      {"tolerances", {{"spline", spline_tol}, {"network", network_tol}, {"gadget", gadget_tol}}},
      {"pass", pass}};
  write_json(ctx.file("verify.json"), report);
  ctx.result.summary = report;
  ctx.result.exit_code = pass ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------- train

void train_command(const json& cfg, Context& ctx) {
  check_schema(cfg,
               {{"seed", Kind::Integer, true}, {"out", Kind::String}, {"problem", Kind::ProblemSpec, true},
                {"network", Kind::Object, true}, {"train", Kind::Object}, {"init", Kind::String}},
               "train");
  const json& nj = cfg.at("network");
  check_schema(nj, {{"depth", Kind::Integer, true}, {"width", Kind::Integer, true}, {"activation_index", Kind::Array}},
               "train.network");
  const json tj = cfg.value("train", json::object());
  require(!tj.contains("seed"), "train.train: the seed belongs at the top level");
  TrainConfig tc = train_config_from_json(tj);
  tc.seed = ctx.seed;
  const PdeProblem prob = parse_problem(cfg.at("problem"), tc.lambda);

  FunctionClassSpec spec;
  spec.depth = nj.at("depth").get<int>();
  spec.width = nj.at("width").get<int>();
  if (nj.contains("activation_index")) spec.activation_index = nj.at("activation_index").get<std::set<int>>();
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const Network init = cfg.contains("init") ? load_network(cfg.at("init").get<std::string>())
                                            : random_init(spec, prob.dim, ctx.seed);
  const CubeQuadrature quad = CubeQuadrature::make(prob.dim);

  json summary{{"command", "train"},
               {"seed", ctx.seed},
               {"problem", prob.name},
               {"lambda", tc.lambda.value_or(prob.lambda)},
               {"depth", init.depth()},
               {"width", init.width()},
               {"parameters", init.parameter_count()},
               {"epochs", tc.epochs}};
  std::optional<TrainResult> run;
  try {
    run = train(init, prob, tc, prob.exact ? &quad : nullptr);
  } catch (const TrainingDivergedError& e) {
    save_network(e.last_finite(), ctx.file("model_last_finite.json"));
    summary["diverged"] = true;
    summary["diverged_epoch"] = e.epoch();
    summary["message"] = e.what();
    write_json(ctx.file("summary.json"), summary);
    ctx.result.summary = summary;
    ctx.result.exit_code = kExitDiverged;
    return;
  }
  const TrainResult& r = *run;
  save_network(r.best, ctx.file("model.json"));
  std::ostringstream csv;
  write_history_csv(csv, r.history);
  write_text(ctx.file("history.csv"), csv.str());

  summary["diverged"] = false;
  summary["best_epoch"] = r.best_epoch;
  summary["best_val_energy"] = r.best_val_energy;
  if (prob.exact) {
    const double err = h1_distance(network_field(r.best), *prob.exact, quad);
    summary["h1_error"] = err;
    summary["relative_h1_error"] = err / h1_norm(*prob.exact, quad);
  }
  write_json(ctx.file("summary.json"), summary);
  ctx.result.summary = summary;

  if (ctx.plot) {
    Series val{"validation energy", {}, {}}, tr{"training energy", {}, {}}, h1{"H1 error", {}, {}};
    for (const HistoryRow& row : r.history) {
      val.x.push_back(row.epoch);
      val.y.push_back(row.val_energy);
      tr.x.push_back(row.epoch);
      tr.y.push_back(row.train_energy);
      if (row.h1_error) {
        h1.x.push_back(row.epoch);
        h1.y.push_back(*row.h1_error);
      }
    }
    write_line_chart(ctx.file("history.svg"), {"Training history", "epoch", "energy", false, false}, {tr, val});
    if (!h1.x.empty()) write_line_chart(ctx.file("h1_error.svg"), {"H1 error", "epoch", "error", false, true}, {h1});
  }
}

// ---------------------------------------------------------------- convergence

void convergence(const json& cfg, Context& ctx) {
  check_schema(cfg,
               {{"seed", Kind::Integer, true}, {"out", Kind::String}, {"problem", Kind::ProblemSpec, true},
                {"n_list", Kind::Array, true}, {"seeds", Kind::Array}, {"repeats", Kind::Integer},
                {"epochs", Kind::Integer}, {"optimizer", Kind::Object}, {"eval_every", Kind::Integer},
                {"n_validation", Kind::Integer}, {"schedule_constants", Kind::Object}, {"depth", Kind::Integer},
                {"width", Kind::Integer}, {"lambda", Kind::Number}},
               "convergence");
  require(!(cfg.contains("seeds") && cfg.contains("repeats")), "convergence: give either 'seeds' or 'repeats'");
  std::vector<std::int64_t> seeds;
  if (cfg.contains("seeds")) {
    seeds = integer_list(cfg, "seeds", "convergence");
  } else {
    const int repeats = get_or(cfg, "repeats", 1);
    require(repeats >= 1, "convergence: repeats must be >= 1");
    for (int k = 0; k < repeats; ++k) seeds.push_back(static_cast<std::int64_t>(ctx.seed) + k);
  }
  const std::vector<std::int64_t> n_list = integer_list(cfg, "n_list", "convergence");
  for (std::int64_t n : n_list) require(n >= 3, "convergence: every n must be >= 3");

  ScheduleConstants consts;
  if (cfg.contains("schedule_constants")) {
    const json& sc = cfg.at("schedule_constants");
    check_schema(sc, {{"width", Kind::Number}, {"lambda", Kind::Number}}, "convergence.schedule_constants");
    consts.width = get_or(sc, "width", 1.0);
    consts.lambda = get_or(sc, "lambda", 1.0);
    require(consts.width > 0.0 && consts.lambda > 0.0, "convergence: schedule constants must be positive");
  }
  TrainConfig base = train_config_from_json(json{{"optimizer", cfg.value("optimizer", json::object())}});
  base.epochs = get_or(cfg, "epochs", 1000);
  base.eval_every = get_or(cfg, "eval_every", 10);
  base.n_validation = get_or(cfg, "n_validation", static_cast<std::size_t>(4096));
  base.resample_every = 0;
  try {
    base.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }

  const PdeProblem prob = parse_problem(cfg.at("problem"), std::nullopt);
  require(prob.exact.has_value(), "convergence: the problem needs a known exact solution");
  const CubeQuadrature quad = CubeQuadrature::make(prob.dim);
  const double exact_norm = h1_norm(*prob.exact, quad);

  std::ostringstream csv;
  csv << "n,depth,width,lambda,seed,h1_error,l2_error,runtime_s\n";
  json per_n = json::array();
  int diverged = 0;
  Series curve{"median H1 error", {}, {}};
  for (std::int64_t n : n_list) {
    const Schedule s = schedule_from_n(static_cast<double>(n), prob.dim, consts);
    const int depth = get_or(cfg, "depth", s.depth);
    const int width = get_or(cfg, "width", s.width);
    const double lambda = get_or(cfg, "lambda", s.lambda);
    require(depth >= 1 && width >= 1 && lambda > 0.0, "convergence: depth, width, lambda must be positive");
    std::vector<double> h1s, l2s;
    for (std::int64_t rs : seeds) {
      FunctionClassSpec spec;
      spec.depth = depth;
      spec.width = width;
      const Network init = random_init(spec, prob.dim, static_cast<std::uint64_t>(rs));
      TrainConfig tc = base;
      tc.n_interior = tc.n_boundary = static_cast<std::size_t>(n);
      tc.seed = static_cast<std::uint64_t>(rs);
      tc.lambda = lambda;
      const auto t0 = std::chrono::steady_clock::now();
      Network best = init;
      try {
        best = train(init, prob, tc).best;
      } catch (const TrainingDivergedError& e) {
        best = e.last_finite();
        ++diverged;
      }
      const Field u = network_field(best);
      const double h1 = h1_distance(u, *prob.exact, quad);
      const double l2 = l2_distance(u, *prob.exact, quad);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      h1s.push_back(h1);
      l2s.push_back(l2);
      csv << n << ',' << depth << ',' << width << ',' << num(lambda) << ',' << rs << ',' << num(h1) << ',' << num(l2)
          << ',' << num(secs) << '\n';
    }
    const double med = median(h1s);
    curve.x.push_back(static_cast<double>(n));
    curve.y.push_back(med);
    per_n.push_back({{"n", n},
                     {"depth", depth},
                     {"width", width},
                     {"lambda", lambda},
                     {"runs", seeds.size()},
                     {"median_h1_error", med},
                     {"median_relative_h1_error", med / exact_norm},
                     {"median_l2_error", median(l2s)}});
  }
  write_text(ctx.file("convergence.csv"), csv.str());
  json summary{{"command", "convergence"}, {"seed", ctx.seed},          {"problem", prob.name},
               {"epochs", base.epochs},    {"exact_h1_norm", exact_norm}, {"diverged_runs", diverged},
               {"per_n", per_n}};
  write_json(ctx.file("summary.json"), summary);
  ctx.result.summary = summary;
  if (ctx.plot) write_line_chart(ctx.file("convergence.svg"), {"Median H1 error", "n", "H1 error", true, true}, {curve});
}

// ---------------------------------------------------------------- penalty-study

void penalty_study(const json& cfg, Context& ctx) {
  check_schema(cfg,
               {{"seed", Kind::Integer, true}, {"out", Kind::String}, {"problem", Kind::ProblemSpec, true},
                {"lambdas", Kind::Array, true}, {"K", Kind::Integer}, {"quad_order", Kind::Integer}},
               "penalty-study");
  const std::vector<double> lambdas = number_list(cfg, "lambdas", "penalty-study");
  const int K = get_or(cfg, "K", 4096);
  const int q = get_or(cfg, "quad_order", 4);
  require(q >= 1 && q <= 16, "penalty-study: quad_order must lie in 1..16");
  const PdeProblem prob = parse_problem(cfg.at("problem"), std::nullopt);
  require(prob.dim == 1, "penalty-study: the oracle is one-dimensional");
  PenaltyStudy s;
  try {
    s = penalty_rate_study(prob, lambdas, K, CubeQuadrature::make(1, q, K));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("penalty-study: ") + e.what());
  }
  std::ostringstream csv;
  write_penalty_csv(csv, s);
  write_text(ctx.file("penalty.csv"), csv.str());

  double lo = INFINITY, hi = 0.0;
  Series err{"H1 error", {}, {}}, bnd{"boundary L2", {}, {}};
  for (const PenaltyRow& r : s.rows) {
    const double scaled = r.r_lambda * r.lambda * r.lambda;
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
    err.x.push_back(r.lambda);
    err.y.push_back(r.h1_error);
    bnd.x.push_back(r.lambda);
    bnd.y.push_back(r.boundary_l2);
  }
  json summary = penalty_summary_json(s);
  summary["command"] = "penalty-study";
  summary["seed"] = ctx.seed;
  summary["problem"] = prob.name;
  summary["K"] = K;
  summary["r_lambda_scaled_min"] = lo;
  summary["r_lambda_scaled_max"] = hi;
  summary["r_lambda_scaled_ratio"] = hi / lo;
  write_json(ctx.file("summary.json"), summary);
  ctx.result.summary = summary;
  if (ctx.plot) write_line_chart(ctx.file("penalty.svg"), {"Penalty error", "lambda", "error", true, true}, {err, bnd});
}

// ---------------------------------------------------------------- spline-study

void spline_study(const json& cfg, Context& ctx) {
  check_schema(cfg,
               {{"seed", Kind::Integer, true}, {"out", Kind::String}, {"dim", Kind::Integer},
                {"levels", Kind::Array, true}, {"points_per_interval", Kind::Integer}, {"target", Kind::String}},
               "spline-study");
  const int d = get_or(cfg, "dim", 1);
  require(d >= 1 && d <= 3, "spline-study: dim must lie in 1..3");
  require(get_or(cfg, "target", std::string("sine")) == "sine", "spline-study: the only target is 'sine'");
  FitOptions opts;
  opts.points_per_interval = get_or(cfg, "points_per_interval", opts.points_per_interval);
  const std::vector<std::int64_t> levels = integer_list(cfg, "levels", "spline-study");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    require(levels[k] >= 1 && levels[k] <= 10, "spline-study: levels must lie in 1..10");
    require(k == 0 || levels[k] == levels[k - 1] + 1, "spline-study: levels must be consecutive");
  }
  const Field target = sine_target(d);

  std::ostringstream csv;
  csv << "level,h1_error,ratio,fit_residual\n";
  std::vector<double> errors, ratios;
  Series curve{"H1 error", {}, {}};
  for (std::int64_t l : levels) {
    const int level = static_cast<int>(l);
    const H1Fit fit = fit_h1(target, level, d, opts);
    const CubeQuadrature q = CubeQuadrature::make(d, 8, 1 << level);
    const double err = h1_distance(fit.spline.as_field(), target, q);
    csv << level << ',' << num(err) << ',';
    if (!errors.empty()) {
      ratios.push_back(err / errors.back());
      csv << num(ratios.back());
    }
    csv << ',' << num(fit.residual) << '\n';
    errors.push_back(err);
    curve.x.push_back(level);
    curve.y.push_back(err);
  }
  write_text(ctx.file("spline_study.csv"), csv.str());
  double mean_log = 0.0;
  for (double r : ratios) mean_log += std::log2(r);
  json summary{{"command", "spline-study"}, {"seed", ctx.seed}, {"dim", d},          {"levels", levels},
               {"h1_errors", errors},        {"ratios", ratios},  {"observed_order", ratios.empty() ? 0.0 : -mean_log / ratios.size()}};
  write_json(ctx.file("summary.json"), summary);
  ctx.result.summary = summary;
  if (ctx.plot) write_line_chart(ctx.file("spline_study.svg"), {"Spline H1 error", "level", "error", false, true}, {curve});
}

// ---------------------------------------------------------------- bounds

void bounds(const json& cfg, Context& ctx) {
  check_schema(cfg,
               {{"seed", Kind::Integer, true}, {"out", Kind::String}, {"depth", Kind::Integer, true},
                {"width", Kind::Integer, true}, {"d", Kind::Integer, true}, {"n", Kind::Number, true},
                {"lambda", Kind::Number, true}, {"bound", Kind::Number, true}, {"c3", Kind::Number, true},
                {"covering_eps", Kind::Array}, {"empirical", Kind::Object}},
               "bounds");
  ComplexityInputs in;
  in.depth = cfg.at("depth").get<int>();
  in.width = cfg.at("width").get<int>();
  in.d = cfg.at("d").get<int>();
  in.n = cfg.at("n").get<double>();
  in.lambda = cfg.at("lambda").get<double>();
  in.bound = cfg.at("bound").get<double>();
  in.c3 = cfg.at("c3").get<double>();
  if (cfg.contains("covering_eps")) in.covering_eps = number_list(cfg, "covering_eps", "bounds");
  require(in.d >= 1, "bounds: d must be >= 1");
  ComplexityReport r;
  try {
    r = make_complexity_report(in);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("bounds: ") + e.what());
  }
  json report = to_json(r);
  report["command"] = "bounds";
  report["seed"] = ctx.seed;

  if (cfg.contains("empirical")) {
    const json& ej = cfg.at("empirical");
    check_schema(ej, {{"nets", Kind::Integer}, {"points", Kind::Integer}, {"trials", Kind::Integer}}, "bounds.empirical");
    const int nets = get_or(ej, "nets", 50), points = get_or(ej, "points", 256), trials = get_or(ej, "trials", 200);
    require(nets >= 1 && points >= 1 && trials >= 2, "bounds.empirical: nets, points >= 1 and trials >= 2");
    FunctionClassSpec spec;
    spec.depth = in.depth;
    spec.width = in.width;
    std::vector<Network> members;
    const PointSet z = sample_interior(static_cast<std::size_t>(points), in.d, ctx.seed);
    double measured = 0.0;
    for (int k = 0; k < nets; ++k) {
      members.push_back(random_init(spec, in.d, ctx.seed + static_cast<std::uint64_t>(k)));
      measured = std::max(measured, members.back().forward(z).cwiseAbs().maxCoeff());
    }
    const MonteCarloEstimate e = empirical_rademacher(members, z, trials, ctx.seed);
    json emp{{"nets", nets}, {"points", points}, {"trials", trials}, {"estimate", e.mean}, {"std_error", e.std_error},
             {"measured_bound", measured}};
    if (points >= r.pdim_bound && measured > 0.0) {
      const double b = rademacher_bound(points, measured, r.pdim_bound);
      emp["rademacher_bound"] = b;
      emp["dominated"] = e.mean <= b;
    } else {
      emp["rademacher_bound"] = nullptr;
      emp["dominated"] = nullptr;
    }
    report["empirical"] = emp;
  }
  write_json(ctx.file("bounds.json"), report);
  write_json(ctx.file("summary.json"), report);
  ctx.result.summary = report;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"verify-constructions", "train", "convergence", "penalty-study", "spline-study", "bounds"};
}

json load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

CommandOutput run_command(std::string_view name, const json& config, const RunOptions& opts) {
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  Context ctx;
  ctx.plot = opts.plot;
  const bool seed_ok = config.contains("seed") &&
                       (config.at("seed").is_number_unsigned() ||
                        (config.at("seed").is_number_integer() && config.at("seed").get<std::int64_t>() >= 0));
  if (!seed_ok) {
    throw ConfigError("config: 'seed' must be a non-negative integer");
  }
  ctx.seed = config.at("seed").get<std::uint64_t>();
  if (opts.out) {
    ctx.out = *opts.out;
  } else if (config.contains("out") && config.at("out").is_string()) {
    ctx.out = config.at("out").get<std::string>();
  } else {
    throw ConfigError("config: an output directory is required ('out' or --out)");
  }

  using Handler = void (*)(const json&, Context&);
  const std::pair<std::string_view, Handler> table[] = {
      {"verify-constructions", verify_constructions}, {"train", train_command},
      {"convergence", convergence},                   {"penalty-study", penalty_study},
      {"spline-study", spline_study},                 {"bounds", bounds}};
  for (const auto& [cmd, handler] : table) {
    if (cmd != name) continue;
    try {
      handler(config, ctx);
    } catch (const json::exception& e) {
      throw ConfigError(std::string(name) + ": " + e.what());
    }
    if (name == "verify-constructions") write_json(ctx.file("summary.json"), ctx.result.summary);
    return ctx.result;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

}  // namespace drm::cli
