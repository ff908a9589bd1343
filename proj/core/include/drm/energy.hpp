#pragma once

#include <span>

#include <nlohmann/json.hpp>

#include "drm/autodiff.hpp"
#include "drm/field.hpp"
#include "drm/network.hpp"
#include "drm/pde.hpp"

namespace drm {

/// e1 = mean 1/2 |grad u|^2, e2 = mean 1/2 w u^2, e3 = mean u f (stored
/// positive), e4 = boundary integral / average of u^2.
/// total = e1 + e2 - e3 + lambda/2 * e4.
struct EnergyBreakdown {
  double e1 = 0.0;
  double e2 = 0.0;
  double e3 = 0.0;
  double e4 = 0.0;
  double lambda = 0.0;
  double total = 0.0;

  static EnergyBreakdown assemble(double e1, double e2, double e3, double e4, double lambda);
};

nlohmann::json to_json(const EnergyBreakdown& e);

/// Monte Carlo energy with |Omega| = 1, |boundary| = 2d. The input gradient
/// comes from the derivative networks of `net`.
EnergyBreakdown discrete_energy(const Network& net, const SampleBatch& batch, const PdeProblem& prob);
/// Same sums for an arbitrary field.
EnergyBreakdown discrete_energy(const Field& u, const SampleBatch& batch, const PdeProblem& prob);

/// Quadrature version of the penalized energy.
EnergyBreakdown continuous_energy(const Field& u, const PdeProblem& prob, const CubeQuadrature& quad);

/// a(u, v) = int grad u . grad v + w u v
double quadratic_form_a(const Field& u, const Field& v, const PdeProblem& prob, const CubeQuadrature& quad);
/// a(u, v) + lambda int over the boundary of u v
double a_lambda(const Field& u, const Field& v, const PdeProblem& prob, const CubeQuadrature& quad);

/// A batch with coefficient values cached for repeated energy evaluation.
struct EnergyBatch {
  PointSet interior;
  PointSet boundary;
  Vector w;  // at interior points
  Vector f;  // at interior points

  static EnergyBatch make(const SampleBatch& batch, const PdeProblem& prob);
};

/// Tape handles of the four components and the total.
struct EnergyVars {
  ad::Var e1, e2, e3, e4, total;
};

/// Records the discrete energy of the network with parameters `params`
/// ([A_1, b_1, ..., A_L, b_L]) and the activations of `shape`. The input
/// gradient is propagated as tangents D_i h_k = s'(z_k) * A_k D_i h_{k-1}.
EnergyVars record_energy(ad::Tape& tape, std::span<const ad::Var> params, const Network& shape,
                         const EnergyBatch& batch, double lambda);

/// Value and parameter gradient of the discrete energy.
ad::ValueAndGradient energy_value_and_gradient(const Network& net, const EnergyBatch& batch, double lambda);

}  // namespace drm
