#include "drm/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "drm/energy.hpp"
#include "drm/rng.hpp"

namespace drm {

void TrainConfig::validate() const {
  if (n_interior < 1 || n_boundary < 1) throw DomainError("train: sample counts must be positive");
  if (epochs < 0) throw DomainError("train: epochs must be >= 0");
  if (!(optimizer.learning_rate > 0.0)) throw DomainError("train: learning rate must be positive");
  if (optimizer.beta1 < 0.0 || optimizer.beta1 >= 1.0 || optimizer.beta2 < 0.0 || optimizer.beta2 >= 1.0) {
    throw DomainError("train: Adam betas must lie in [0, 1)");
  }
  if (!(optimizer.epsilon > 0.0)) throw DomainError("train: Adam epsilon must be positive");
  if (resample_every < 0) throw DomainError("train: resample_every must be >= 0");
  if (lambda && !(*lambda > 0.0)) throw DomainError("train: lambda must be positive");
  if (n_validation < 1) throw DomainError("train: n_validation must be positive");
  if (eval_every < 1) throw DomainError("train: eval_every must be >= 1");
  if (!(divergence_threshold > 0.0)) throw DomainError("train: divergence_threshold must be positive");
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace

TrainConfig train_config_from_json(const nlohmann::json& j) {
  reject_unknown(j,
                 {"n_interior", "n_boundary", "epochs", "optimizer", "resample_every", "seed", "lambda",
                  "n_validation", "eval_every", "divergence_threshold"},
                 "train config");
  TrainConfig c;
  try {
    c.n_interior = j.value("n_interior", c.n_interior);
    c.n_boundary = j.value("n_boundary", c.n_boundary);
    c.epochs = j.value("epochs", c.epochs);
    c.resample_every = j.value("resample_every", c.resample_every);
    c.seed = j.value("seed", c.seed);
    if (j.contains("lambda")) c.lambda = j.at("lambda").get<double>();
    c.n_validation = j.value("n_validation", c.n_validation);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.divergence_threshold = j.value("divergence_threshold", c.divergence_threshold);
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      reject_unknown(o, {"kind", "learning_rate", "beta1", "beta2", "epsilon"}, "optimizer");
      const std::string kind = o.value("kind", std::string("adam"));
      if (kind == "adam") c.optimizer.kind = OptimizerKind::Adam;
      else if (kind == "sgd") c.optimizer.kind = OptimizerKind::Sgd;
      else throw ConfigError("optimizer: kind must be 'adam' or 'sgd'");
      c.optimizer.learning_rate = o.value("learning_rate", c.optimizer.learning_rate);
      c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
      c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
      c.optimizer.epsilon = o.value("epsilon", c.optimizer.epsilon);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

double measured_bound(const Network& net, const PointSet& points) {
  const NetworkJet jet = evaluate_with_gradient(net, points);
  const double vmax = jet.value.cwiseAbs().maxCoeff();
  const double gmax = jet.gradient.colwise().squaredNorm().maxCoeff();
  return std::max(vmax, gmax);
}

namespace {

class Optimizer {
 public:
  Optimizer(const OptimizerConfig& cfg, const ad::ParameterSet& shape) : cfg_(cfg) {
    for (const Matrix& p : shape) {
      m_.push_back(Matrix::Zero(p.rows(), p.cols()));
      v_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }

  void step(ad::ParameterSet& params, const ad::ParameterSet& grad) {
    ++t_;
    if (cfg_.kind == OptimizerKind::Sgd) {
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= cfg_.learning_rate * grad[k];
      return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grad[k];
      v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grad[k].cwiseAbs2();
      params[k].array() -=
          cfg_.learning_rate * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + cfg_.epsilon);
    }
  }

 private:
  OptimizerConfig cfg_;
  std::vector<Matrix> m_, v_;
  int t_ = 0;
};

}  // namespace

TrainResult train(const Network& init, const PdeProblem& prob, const TrainConfig& cfg, const CubeQuadrature* h1_quad) {
  cfg.validate();
  if (init.input_dim() != prob.dim) throw ShapeError("train: network input dimension does not match the problem");
  PdeProblem p = prob;
  if (cfg.lambda) p.lambda = *cfg.lambda;
  p.validate();

  const CounterRng batches(cfg.seed, 2);
  const CounterRng validation(cfg.seed, 3);
  const SampleBatch val_batch = sample_batch(cfg.n_validation, cfg.n_validation, p.dim, validation.bits(0));

  auto batch_for = [&](std::uint64_t index) {
    return EnergyBatch::make(sample_batch(cfg.n_interior, cfg.n_boundary, p.dim, batches.bits(index)), p);
  };
  std::uint64_t batch_index = 0;
  EnergyBatch batch = batch_for(0);

  ad::ParameterSet params = init.parameters();
  Optimizer opt(cfg.optimizer, params);
  Network current = init;

  TrainResult result{init, 0, 0.0, {}};
  bool have_best = false;

  auto record = [&](int epoch) {
    HistoryRow row;
    row.epoch = epoch;
    const Field u = network_field(current);
    const SampleBatch train_view{batch.interior, batch.boundary, 0};
    row.train_energy = discrete_energy(u, train_view, p).total;
    row.val_energy = discrete_energy(u, val_batch, p).total;
    row.measured_B = measured_bound(current, val_batch.interior);
    if (h1_quad && p.exact) row.h1_error = h1_distance(u, *p.exact, *h1_quad);
    if (!have_best || row.val_energy < result.best_val_energy) {
      result.best = current;
      result.best_epoch = epoch;
      result.best_val_energy = row.val_energy;
      have_best = true;
    }
    result.history.push_back(row);
  };

  record(0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.resample_every > 0) {
      const std::uint64_t want = static_cast<std::uint64_t>((epoch - 1) / cfg.resample_every);
      if (want != batch_index) {
        batch_index = want;
        batch = batch_for(batch_index);
      }
    }
    ad::ValueAndGradient vg;
    try {
      vg = energy_value_and_gradient(current, batch, p.lambda);
    } catch (const NumericOverflowError& e) {
      throw TrainingDivergedError(std::string("training diverged: ") + e.what(), current, epoch);
    }
    if (!std::isfinite(vg.value) || std::abs(vg.value) > cfg.divergence_threshold) {
      throw TrainingDivergedError("training diverged: energy " + std::to_string(vg.value) + " at epoch " +
                                      std::to_string(epoch),
                                  current, epoch);
    }
    ad::ParameterSet next = params;
    opt.step(next, vg.gradient);
    bool finite = true;
    for (const Matrix& m : next) finite = finite && m.allFinite();
    if (!finite) throw TrainingDivergedError("training diverged: non-finite parameters", current, epoch);
    params = std::move(next);
    current = current.with_parameters(params);
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) record(epoch);
  }
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows) {
  bool with_h1 = false;
  for (const HistoryRow& r : rows) with_h1 = with_h1 || r.h1_error.has_value();
  out << "epoch,train_energy,val_energy,measured_B" << (with_h1 ? ",h1_error" : "") << '\n';
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const HistoryRow& r : rows) {
    out << r.epoch << ',' << num(r.train_energy) << ',' << num(r.val_energy) << ',' << num(r.measured_B);
    if (with_h1) out << ',' << (r.h1_error ? num(*r.h1_error) : std::string());
    out << '\n';
  }
}

Schedule schedule_from_n(double n, int d, const ScheduleConstants& c) {
  if (d < 1) throw DomainError("schedule: d must be >= 1");
  if (!(n >= 3.0)) throw BudgetTooSmallError("schedule: n must be >= 3 so that log n > 1");
  Schedule s;
  s.n = n;
  s.d = d;
  s.depth = static_cast<int>(std::ceil(std::log2(static_cast<double>(d)))) + 3;
  const double logn = std::log(n);
  const double base = c.width * std::pow(n / logn, 1.0 / (2.0 * (d + 2)));
  const double terms = std::max(1.0, std::ceil(base - 4.0));
  s.width = static_cast<int>(4.0 * d * std::pow(terms, d));
  s.lambda = c.lambda * std::pow(n, 1.0 / (3.0 * (d + 2))) * std::pow(logn, -(d + 3.0) / (3.0 * (d + 2)));
  return s;
}

}  // namespace drm
