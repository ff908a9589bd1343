#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "drm/errors.hpp"
#include "drm/network.hpp"
#include "drm/pde.hpp"

namespace drm {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t n_interior = 1024;
  std::size_t n_boundary = 1024;
  int epochs = 1000;
  OptimizerConfig optimizer;
  /// Epochs between fresh batches; 0 keeps the first batch for the whole run.
  int resample_every = 1;
  std::uint64_t seed = 0;
  /// Overrides the problem's penalty when set.
  std::optional<double> lambda;
  /// Held-out batch (interior and boundary) used to pick the best iterate.
  std::size_t n_validation = 4096;
  int eval_every = 10;
  double divergence_threshold = 1e6;

  void validate() const;
};

TrainConfig train_config_from_json(const nlohmann::json& j);

struct HistoryRow {
  int epoch = 0;
  double train_energy = 0.0;
  double val_energy = 0.0;
  /// max over validation points of max(|u|, |grad u|^2)
  double measured_B = 0.0;
  /// H^1 distance to the exact solution, when one is known.
  std::optional<double> h1_error;
};

struct TrainResult {
  Network best;
  int best_epoch = 0;
  double best_val_energy = 0.0;
  std::vector<HistoryRow> history;
};

/// Energy left the finite range or exceeded the divergence threshold.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, Network last_finite, int epoch)
      : Error(what), last_finite_(std::move(last_finite)), epoch_(epoch) {}

  const Network& last_finite() const noexcept { return last_finite_; }
  int epoch() const noexcept { return epoch_; }

 private:
  Network last_finite_;
  int epoch_;
};

/// Minimizes the discrete penalized energy. Validation rows are recorded at
/// epoch 0, every eval_every epochs and at the last epoch; the returned
/// network is the recorded iterate with the lowest validation energy.
/// `h1_quad` enables the h1_error column when the problem has an exact solution.
TrainResult train(const Network& init, const PdeProblem& prob, const TrainConfig& cfg,
                  const CubeQuadrature* h1_quad = nullptr);

double measured_bound(const Network& net, const PointSet& points);

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows);

/// Depth, width and penalty for a sample budget n.
struct Schedule {
  double n = 0.0;
  int d = 1;
  int depth = 3;
  int width = 4;
  double lambda = 1.0;
};

/// Proportionality constants of the schedule.
struct ScheduleConstants {
  double width = 1.0;
  double lambda = 1.0;
};

/// depth = ceil(log2 d) + 3,
/// width = 4d max(1, ceil(C_w (n / ln n)^(1/(2(d+2))) - 4))^d,
/// lambda = C_l n^(1/(3(d+2))) (ln n)^(-(d+3)/(3(d+2))).
Schedule schedule_from_n(double n, int d, const ScheduleConstants& c = {});

}  // namespace drm
