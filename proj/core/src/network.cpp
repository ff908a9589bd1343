#include "drm/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drm/errors.hpp"
#include "drm/rng.hpp"
#include "layer_builder.hpp"

namespace drm {

using detail::Forms;
using detail::LayerBuilder;

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Relu2: return "relu2";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "identity") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "relu2") return Activation::Relu2;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Layer

Layer::Layer(Matrix w, Vector b, Activation a)
    : Layer(std::move(w), std::move(b), std::vector<Activation>()) {
  activations.assign(static_cast<std::size_t>(weights.rows()), a);
}

Layer::Layer(Matrix w, Vector b, std::vector<Activation> acts)
    : weights(std::move(w)), bias(std::move(b)), activations(std::move(acts)) {
  if (bias.size() != weights.rows()) {
    throw ShapeError("layer: bias has " + std::to_string(bias.size()) + " entries, weights have " +
                     std::to_string(weights.rows()) + " rows");
  }
  // The delegating constructor fills activations afterwards.
  if (!activations.empty() && activations.size() != static_cast<std::size_t>(weights.rows())) {
    throw ShapeError("layer: one activation per output unit expected");
  }
  if (!weights.allFinite() || !bias.allFinite()) throw DomainError("layer: non-finite parameter");
}

std::optional<Activation> Layer::uniform_activation() const {
  if (activations.empty()) return std::nullopt;
  const Activation first = activations.front();
  for (Activation a : activations) {
    if (a != first) return std::nullopt;
  }
  return first;
}

bool Layer::uses(Activation a) const {
  return std::find(activations.begin(), activations.end(), a) != activations.end();
}

namespace {

void activate_rows(Matrix& z, const std::vector<Activation>& acts) {
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    switch (acts[static_cast<std::size_t>(r)]) {
      case Activation::Identity: break;
      case Activation::Relu: z.row(r) = z.row(r).cwiseMax(0.0); break;
      case Activation::Relu2: z.row(r) = z.row(r).cwiseMax(0.0).cwiseAbs2(); break;
    }
  }
}

Matrix derivative_rows(const Matrix& z, const std::vector<Activation>& acts) {
  Matrix s(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    switch (acts[static_cast<std::size_t>(r)]) {
      case Activation::Identity: s.row(r).setOnes(); break;
      case Activation::Relu: s.row(r) = (z.row(r).array() > 0.0).cast<double>().matrix(); break;
      case Activation::Relu2: s.row(r) = 2.0 * z.row(r).cwiseMax(0.0); break;
    }
  }
  return s;
}

}  // namespace

Matrix Layer::apply(const Matrix& input) const {
  if (input.rows() != in_dim()) throw ShapeError("layer: input dimension mismatch");
  Matrix z = weights * input;
  z.colwise() += bias;
  activate_rows(z, activations);
  return z;
}

// ---------------------------------------------------------------- Network

Network::Network(int input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ < 1) throw ShapeError("network: input_dim must be positive");
  if (layers_.empty()) throw ShapeError("network: at least one layer required");
  Eigen::Index prev = input_dim_;
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    if (layers_[k].in_dim() != prev) {
      throw ShapeError("network: layer " + std::to_string(k) + " expects " +
                       std::to_string(layers_[k].in_dim()) + " inputs, previous size is " +
                       std::to_string(prev));
    }
    prev = layers_[k].out_dim();
  }
  const Layer& out = layers_.back();
  if (out.out_dim() != 1) throw ShapeError("network: output layer must have one unit");
  if (out.uniform_activation() != Activation::Identity) {
    throw ShapeError("network: output activation must be identity");
  }
}

int Network::width() const noexcept {
  Eigen::Index w = 0;
  for (const Layer& l : layers_) w = std::max(w, l.out_dim());
  return static_cast<int>(w);
}

std::size_t Network::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

bool Network::relu2_hidden() const noexcept {
  for (std::size_t k = 0; k + 1 < layers_.size(); ++k) {
    if (layers_[k].uniform_activation() != Activation::Relu2) return false;
  }
  return true;
}

double Network::forward(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(input_dim_)) {
    throw ShapeError("forward: point has dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(input_dim_));
  }
  PointSet p = Eigen::Map<const Vector>(x.data(), input_dim_);
  return forward(p)(0);
}

Vector Network::forward(const PointSet& points) const {
  if (points.rows() != input_dim_) throw ShapeError("forward: point dimension mismatch");
  Matrix h = points;
  for (const Layer& l : layers_) h = l.apply(h);
  return h.row(0).transpose();
}

ad::ParameterSet Network::parameters() const {
  ad::ParameterSet p;
  p.reserve(2 * layers_.size());
  for (const Layer& l : layers_) {
    p.push_back(l.weights);
    p.push_back(l.bias);
  }
  return p;
}

Network Network::with_parameters(const ad::ParameterSet& params) const {
  if (params.size() != 2 * layers_.size()) throw ShapeError("with_parameters: wrong parameter count");
  std::vector<Layer> out;
  out.reserve(layers_.size());
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Matrix& w = params[2 * k];
    const Matrix& b = params[2 * k + 1];
    if (w.rows() != layers_[k].weights.rows() || w.cols() != layers_[k].weights.cols() ||
        b.rows() != layers_[k].bias.size() || b.cols() != 1) {
      throw ShapeError("with_parameters: shape mismatch at layer " + std::to_string(k));
    }
    out.emplace_back(w, Vector(b.col(0)), layers_[k].activations);
  }
  return Network(input_dim_, std::move(out));
}

NetworkJet evaluate_with_gradient(const Network& net, const PointSet& points) {
  if (points.rows() != net.input_dim()) throw ShapeError("evaluate_with_gradient: dimension mismatch");
  const int d = net.input_dim();
  const Eigen::Index n = points.cols();
  Matrix h = points;
  std::vector<Matrix> tangent(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    tangent[static_cast<std::size_t>(i)] = Matrix::Zero(d, n);
    tangent[static_cast<std::size_t>(i)].row(i).setOnes();
  }
  for (const Layer& l : net.layers()) {
    Matrix z = l.weights * h;
    z.colwise() += l.bias;
    const Matrix slope = derivative_rows(z, l.activations);
    for (Matrix& t : tangent) t = slope.cwiseProduct(l.weights * t);
    activate_rows(z, l.activations);
    h = std::move(z);
  }
  NetworkJet jet;
  jet.value = h.row(0).transpose();
  jet.gradient.resize(d, n);
  for (int i = 0; i < d; ++i) jet.gradient.row(i) = tangent[static_cast<std::size_t>(i)].row(0);
  return jet;
}

// ---------------------------------------------------------------- classes

std::vector<int> FunctionClassSpec::resolved_widths() const {
  if (layer_widths) return *layer_widths;
  std::vector<int> w(static_cast<std::size_t>(depth), width);
  w.back() = 1;
  return w;
}

void FunctionClassSpec::validate() const {
  if (depth < 1) throw DomainError("function class: depth must be >= 1");
  if (width < 1) throw DomainError("function class: width must be >= 1");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw DomainError("function class: bound must be positive");
  if (activation_index.empty()) throw DomainError("function class: empty activation set");
  for (int a : activation_index) {
    if (a != 1 && a != 2) throw DomainError("function class: activation index must be 1 or 2");
  }
  if (layer_widths) {
    const auto& lw = *layer_widths;
    if (lw.size() != static_cast<std::size_t>(depth)) {
      throw DomainError("function class: layer_widths length must equal depth");
    }
    if (*std::min_element(lw.begin(), lw.end()) < 1) throw DomainError("function class: widths must be positive");
    if (*std::max_element(lw.begin(), lw.end()) != width) {
      throw DomainError("function class: max layer width must equal width");
    }
    if (lw.back() != 1) throw DomainError("function class: output layer width must be 1");
  }
}

Network random_init(const FunctionClassSpec& spec, int input_dim, std::uint64_t seed) {
  spec.validate();
  if (input_dim < 1) throw DomainError("random_init: input_dim must be positive");
  const std::vector<int> widths = spec.resolved_widths();
  const Activation hidden = spec.activation_index.count(2) ? Activation::Relu2 : Activation::Relu;
  const CounterRng root(seed);
  std::vector<Layer> layers;
  int fan_in = input_dim;
  for (std::size_t k = 0; k < widths.size(); ++k) {
    const int fan_out = widths[k];
    const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    auto cur = root.split(k).cursor();
    Matrix w(fan_out, fan_in);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = cur.uniform(-r, r);
    }
    const bool last = k + 1 == widths.size();
    layers.emplace_back(std::move(w), Vector::Zero(fan_out), last ? Activation::Identity : hidden);
    fan_in = fan_out;
  }
  return Network(input_dim, std::move(layers));
}

// ---------------------------------------------------------------- gadgets

Network product_gadget() {
  Matrix w(4, 2);
  w << 1, 1, -1, -1, 1, -1, -1, 1;
  Matrix out(1, 4);
  out << 0.25, 0.25, -0.25, -0.25;
  return Network(2, {Layer(w, Vector::Zero(4), Activation::Relu2),
                     Layer(out, Vector::Zero(1), Activation::Identity)});
}

Network square_gadget() {
  Matrix w(2, 1);
  w << 1, -1;
  Matrix out(1, 2);
  out << 1, 1;
  return Network(1, {Layer(w, Vector::Zero(2), Activation::Relu2),
                     Layer(out, Vector::Zero(1), Activation::Identity)});
}

namespace {

// Finishes a construction whose result is `value` (one row) over the
// outputs of `layers.back()` (or over the input when `layers` is empty):
// pads with ReLU pass-through layers until there are target_depth - 1
// layers, then appends the affine output.
Network finish_scalar(int input_dim, std::vector<Layer> layers, Forms value, int target_depth) {
  while (static_cast<int>(layers.size()) < target_depth - 1) {
    LayerBuilder b(value.width());
    const Eigen::Index at = detail::add_relu_carry(b, value);
    value = detail::relu_carry_result(b.size(), at, 1);
    layers.push_back(b.build());
  }
  if (static_cast<int>(layers.size()) != target_depth - 1) {
    throw ConstructionError("construction exceeded its depth budget");
  }
  layers.push_back(detail::output_layer(value));
  return Network(input_dim, std::move(layers));
}

void require_relu2_hidden(const Network& net, const char* what) {
  if (!net.relu2_hidden()) {
    throw ConstructionError(std::string(what) + ": hidden layers must all be ReLU^2");
  }
}

// Stacks the hidden layers of same-depth networks side by side. Returns the
// stacked layers and, for each member, its output as a form over the last
// stacked layer (or over the input for depth-1 members).
std::pair<std::vector<Layer>, Forms> stack_parallel(std::span<const Network> nets) {
  const int d = nets.front().input_dim();
  const int depth = nets.front().depth();
  for (const Network& n : nets) {
    if (n.input_dim() != d || n.depth() != depth) {
      throw ConstructionError("parallel stacking needs equal input dimension and depth");
    }
  }
  std::vector<Layer> layers;
  std::vector<Eigen::Index> offsets(nets.size(), 0);
  Eigen::Index prev_total = d;
  for (int k = 0; k + 1 < depth; ++k) {
    Eigen::Index total = 0;
    for (const Network& n : nets) total += n.layers()[static_cast<std::size_t>(k)].out_dim();
    Matrix w = Matrix::Zero(total, prev_total);
    Vector b(total);
    std::vector<Activation> acts;
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    for (const Network& n : nets) {
      const Layer& l = n.layers()[static_cast<std::size_t>(k)];
      if (k == 0) {
        w.block(row, 0, l.out_dim(), d) = l.weights;
      } else {
        w.block(row, col, l.out_dim(), l.in_dim()) = l.weights;
        col += l.in_dim();
      }
      b.segment(row, l.out_dim()) = l.bias;
      acts.insert(acts.end(), l.activations.begin(), l.activations.end());
      row += l.out_dim();
    }
    layers.emplace_back(std::move(w), std::move(b), std::move(acts));
    prev_total = total;
  }
  Forms out{Matrix::Zero(static_cast<Eigen::Index>(nets.size()), prev_total),
            Vector(static_cast<Eigen::Index>(nets.size()))};
  Eigen::Index col = 0;
  for (std::size_t m = 0; m < nets.size(); ++m) {
    const Layer& l = nets[m].layers().back();
    const Eigen::Index row = static_cast<Eigen::Index>(m);
    if (depth == 1) {
      out.coef.row(row) = l.weights.row(0);
    } else {
      out.coef.block(row, col, 1, l.in_dim()) = l.weights;
      col += l.in_dim();
    }
    out.offset(row) = l.bias(0);
  }
  return {std::move(layers), std::move(out)};
}

}  // namespace

Network build_derivative_network(const Network& net, int coordinate) {
  require_relu2_hidden(net, "derivative network");
  const int d = net.input_dim();
  if (coordinate < 0 || coordinate >= d) {
    throw ConstructionError("derivative network: coordinate " + std::to_string(coordinate) +
                            " out of range for input dimension " + std::to_string(d));
  }
  const auto& src = net.layers();
  const int L = net.depth();
  const int hidden = L - 1;
  const int target = L + 2;
  auto A = [&](int k) -> const Matrix& { return src[static_cast<std::size_t>(k - 1)].weights; };
  auto bias = [&](int k) -> const Vector& { return src[static_cast<std::size_t>(k - 1)].bias; };

  if (hidden == 0) {
    // Affine network: the derivative is a constant.
    Forms c = Forms::constant(d, Vector::Constant(1, A(1)(0, coordinate)));
    return finish_scalar(d, {}, std::move(c), target);
  }

  std::vector<Layer> layers;

  // Stage 1: r1 = relu(z1) and h1 = relu2(z1); Dh1 = 2 a_i * r1 is linear in r1.
  Forms h_prev;   // h_{t} over the current stage outputs
  Forms dh;       // D h_{t} as a form, when available
  Forms carry_y;  // y_t = A_t D h_{t-1}, carried through a ReLU pair
  Forms r_prev;   // r_t over the current stage outputs
  {
    LayerBuilder b(d);
    Forms z1 = Forms::identity(d).mapped(A(1), bias(1));
    const Eigen::Index r_at = b.add(z1, Activation::Relu);
    Eigen::Index h_at = -1;
    if (hidden >= 2) h_at = b.add(z1, Activation::Relu2);
    const Eigen::Index w = b.size();
    layers.push_back(b.build());
    const Vector two_a = 2.0 * A(1).col(coordinate);
    dh = Forms::select(w, r_at, z1.count()).rows_scaled(two_a);
    if (h_at >= 0) h_prev = Forms::select(w, h_at, z1.count());
  }

  // dh_index: which hidden layer `dh` belongs to (1 after stage 1).
  int dh_index = 1;
  for (int t = 2; t <= hidden + 1; ++t) {
    // Stage t needs, as forms over the previous stage: z_t (if t is a hidden
    // layer), and either D h_{t-2}-derived y_{t-1} with r_{t-1} for the product.
    const Eigen::Index in_w = layers.back().out_dim();
    LayerBuilder b(in_w);
    Eigen::Index r_at = -1, h_at = -1, carry_at = -1, prod_at = -1;
    Eigen::Index zt_count = 0;
    if (t <= hidden) {
      Forms zt = h_prev.mapped(A(t), bias(t));
      zt_count = zt.count();
      r_at = b.add(zt, Activation::Relu);
      if (t <= hidden - 1) h_at = b.add(zt, Activation::Relu2);
    }
    Eigen::Index prod_count = 0;
    if (t == 2) {
      if (hidden >= 2) {
        carry_y = dh.mapped(A(2));
        carry_at = detail::add_relu_carry(b, carry_y);
      }
    } else {
      // Product 2 r_{t-1} * y_{t-1} gives D h_{t-1}.
      Forms y = (t == 3) ? carry_y : dh.mapped(A(t - 1));
      prod_count = y.count();
      prod_at = detail::add_product(b, r_prev.scaled(2.0), y);
    }
    const Eigen::Index w = b.size();
    if (w == 0) break;
    layers.push_back(b.build());

    if (t <= hidden) {
      r_prev = Forms::select(w, r_at, zt_count);
      if (h_at >= 0) h_prev = Forms::select(w, h_at, zt_count);
    }
    if (carry_at >= 0) {
      carry_y = detail::relu_carry_result(w, carry_at, carry_y.count());
      dh = Forms{Matrix::Zero(0, w), Vector(0)};
    }
    if (prod_at >= 0) {
      dh = detail::product_result(w, prod_at, prod_count);
      dh_index = t - 1;
    }
  }
  if (dh_index != hidden) throw ConstructionError("derivative network: internal stage mismatch");
  Forms du = dh.mapped(A(L), Vector::Zero(1));
  return finish_scalar(d, std::move(layers), std::move(du), target);
}

Network build_gradnorm_network(const Network& net) {
  require_relu2_hidden(net, "gradient-norm network");
  const int d = net.input_dim();
  std::vector<Network> parts;
  parts.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) parts.push_back(build_derivative_network(net, i));
  auto [layers, outs] = stack_parallel(parts);

  // v_i^2 = relu2(v_i) + relu2(-v_i)
  LayerBuilder sq(outs.width());
  sq.add(outs, Activation::Relu2);
  sq.add(-outs, Activation::Relu2);
  layers.push_back(sq.build());
  Matrix ones = Matrix::Ones(1, 2 * d);
  layers.emplace_back(std::move(ones), Vector::Zero(1), Activation::Identity);
  return Network(d, std::move(layers));
}

Network parallel_sum(std::span<const Network> nets, std::span<const double> scales) {
  if (nets.empty()) throw ConstructionError("parallel_sum: no networks");
  if (nets.size() != scales.size()) throw ConstructionError("parallel_sum: one scale per network");
  auto [layers, outs] = stack_parallel(nets);
  const Eigen::Map<const Vector> s(scales.data(), static_cast<Eigen::Index>(scales.size()));
  Forms total{s.transpose() * outs.coef, Vector::Constant(1, s.dot(outs.offset))};
  layers.push_back(detail::output_layer(total));
  return Network(nets.front().input_dim(), std::move(layers));
}

}  // namespace drm
