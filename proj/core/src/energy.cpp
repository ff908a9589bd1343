#include "drm/energy.hpp"

#include "drm/errors.hpp"

namespace drm {

EnergyBreakdown EnergyBreakdown::assemble(double e1, double e2, double e3, double e4, double lambda) {
  return EnergyBreakdown{e1, e2, e3, e4, lambda, e1 + e2 - e3 + 0.5 * lambda * e4};
}

nlohmann::json to_json(const EnergyBreakdown& e) {
  return {{"e1", e.e1}, {"e2", e.e2}, {"e3", e.e3}, {"e4", e.e4}, {"lambda", e.lambda}, {"total", e.total}};
}

namespace {

void check_batch(const SampleBatch& batch, const PdeProblem& prob) {
  if (batch.interior.cols() == 0 || batch.boundary.cols() == 0) throw EmptyBatchError("energy: empty batch");
  if (batch.interior.rows() != prob.dim || batch.boundary.rows() != prob.dim) {
    throw ShapeError("energy: batch dimension does not match the problem");
  }
}

EnergyBreakdown from_samples(const Vector& u, const Vector& grad_sq, const Vector& ub, const Vector& w,
                             const Vector& f, int d, double lambda) {
  const double n = static_cast<double>(u.size());
  const double m = static_cast<double>(ub.size());
  const double e1 = 0.5 * grad_sq.sum() / n;
  const double e2 = 0.5 * w.cwiseProduct(u.cwiseAbs2()).sum() / n;
  const double e3 = u.cwiseProduct(f).sum() / n;
  const double e4 = 2.0 * d * ub.cwiseAbs2().sum() / m;
  return EnergyBreakdown::assemble(e1, e2, e3, e4, lambda);
}

}  // namespace

EnergyBreakdown discrete_energy(const Network& net, const SampleBatch& batch, const PdeProblem& prob) {
  check_batch(batch, prob);
  if (net.input_dim() != prob.dim) throw ShapeError("energy: network input dimension mismatch");
  const Vector u = net.forward(batch.interior);
  Vector grad_sq = Vector::Zero(u.size());
  for (int i = 0; i < prob.dim; ++i) {
    const Vector di = build_derivative_network(net, i).forward(batch.interior);
    grad_sq += di.cwiseAbs2();
  }
  return from_samples(u, grad_sq, net.forward(batch.boundary), prob.w(batch.interior), prob.f(batch.interior),
                      prob.dim, prob.lambda);
}

EnergyBreakdown discrete_energy(const Field& u, const SampleBatch& batch, const PdeProblem& prob) {
  check_batch(batch, prob);
  const FieldValues in = u(batch.interior);
  const Vector grad_sq = in.gradient.colwise().squaredNorm().transpose();
  return from_samples(in.value, grad_sq, u(batch.boundary).value, prob.w(batch.interior), prob.f(batch.interior),
                      prob.dim, prob.lambda);
}

EnergyBreakdown continuous_energy(const Field& u, const PdeProblem& prob, const CubeQuadrature& quad) {
  if (quad.dim != prob.dim) throw ShapeError("energy: quadrature dimension mismatch");
  const FieldValues in = u(quad.interior.points);
  const Vector& wt = quad.interior.weights;
  const Vector wv = prob.w(quad.interior.points);
  const Vector fv = prob.f(quad.interior.points);
  const double e1 = 0.5 * wt.dot(in.gradient.colwise().squaredNorm().transpose());
  const double e2 = 0.5 * wt.dot(wv.cwiseProduct(in.value.cwiseAbs2()));
  const double e3 = wt.dot(in.value.cwiseProduct(fv));
  const Vector ub = u(quad.boundary.points).value;
  const double e4 = quad.boundary.weights.dot(ub.cwiseAbs2());
  return EnergyBreakdown::assemble(e1, e2, e3, e4, prob.lambda);
}

double quadratic_form_a(const Field& u, const Field& v, const PdeProblem& prob, const CubeQuadrature& quad) {
  const FieldValues a = u(quad.interior.points);
  const FieldValues b = v(quad.interior.points);
  const Vector wv = prob.w(quad.interior.points);
  const Vector dots = a.gradient.cwiseProduct(b.gradient).colwise().sum().transpose();
  return quad.interior.weights.dot(dots + wv.cwiseProduct(a.value).cwiseProduct(b.value));
}

double a_lambda(const Field& u, const Field& v, const PdeProblem& prob, const CubeQuadrature& quad) {
  const Vector ub = u(quad.boundary.points).value;
  const Vector vb = v(quad.boundary.points).value;
  return quadratic_form_a(u, v, prob, quad) + prob.lambda * quad.boundary.weights.dot(ub.cwiseProduct(vb));
}

// ---------------------------------------------------------------- tape

EnergyBatch EnergyBatch::make(const SampleBatch& batch, const PdeProblem& prob) {
  check_batch(batch, prob);
  return EnergyBatch{batch.interior, batch.boundary, prob.w(batch.interior), prob.f(batch.interior)};
}

namespace {

int alpha_of(const Layer& l) {
  const auto a = l.uniform_activation();
  if (!a) throw ConstructionError("energy: mixed-activation layers are not trainable");
  switch (*a) {
    case Activation::Identity: return 0;
    case Activation::Relu: return 1;
    case Activation::Relu2: return 2;
  }
  return 0;
}

}  // namespace

EnergyVars record_energy(ad::Tape& tape, std::span<const ad::Var> params, const Network& shape,
                         const EnergyBatch& batch, double lambda) {
  using ad::Var;
  const auto& layers = shape.layers();
  if (params.size() != 2 * layers.size()) throw ShapeError("record_energy: parameter count mismatch");
  const int d = shape.input_dim();
  const Eigen::Index n = batch.interior.cols();
  const Eigen::Index m = batch.boundary.cols();
  if (n == 0 || m == 0) throw EmptyBatchError("record_energy: empty batch");
  if (batch.interior.rows() != d || batch.boundary.rows() != d) throw ShapeError("record_energy: dimension mismatch");

  Var h = tape.constant(batch.interior);
  Var hb = tape.constant(batch.boundary);
  std::vector<Var> tangent;
  tangent.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    Matrix t = Matrix::Zero(d, n);
    t.row(i).setOnes();
    tangent.push_back(tape.constant(std::move(t)));
  }

  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Var a = params[2 * k];
    const Var b = params[2 * k + 1];
    const int alpha = alpha_of(layers[k]);
    const Var z = tape.affine(a, h, b);
    const Var zb = tape.affine(a, hb, b);
    if (alpha == 0) {
      for (Var& t : tangent) t = tape.affine(a, t);
      h = z;
      hb = zb;
      continue;
    }
    Var slope;
    if (alpha == 2) {
      slope = tape.scale(tape.relu_power(z, 1), 2.0);
    } else {
      // The ReLU slope is piecewise constant in the parameters.
      slope = tape.constant((tape.value(z).array() > 0.0).cast<double>().matrix());
    }
    for (Var& t : tangent) t = tape.product(slope, tape.affine(a, t));
    h = tape.relu_power(z, alpha);
    hb = tape.relu_power(zb, alpha);
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  Var grad_sq = tape.square(tangent[0]);
  for (int i = 1; i < d; ++i) grad_sq = tape.sum(grad_sq, tape.square(tangent[static_cast<std::size_t>(i)]));

  EnergyVars e;
  e.e1 = tape.reduce(grad_sq, 0.5 * inv_n);
  e.e2 = tape.reduce(tape.square(h), Matrix((0.5 * inv_n) * batch.w.transpose()));
  e.e3 = tape.reduce(h, Matrix(inv_n * batch.f.transpose()));
  e.e4 = tape.reduce(tape.square(hb), 2.0 * d / static_cast<double>(m));
  e.total = tape.sum(tape.sum(tape.sum(e.e1, e.e2), e.e3, -1.0), e.e4, 0.5 * lambda);
  return e;
}

ad::ValueAndGradient energy_value_and_gradient(const Network& net, const EnergyBatch& batch, double lambda) {
  return ad::grad_params(
      [&](ad::Tape& tape, std::span<const ad::Var> p) { return record_energy(tape, p, net, batch, lambda).total; },
      net.parameters());
}

}  // namespace drm
