#include "drm/autodiff.hpp"

#include <string>

#include "drm/errors.hpp"

namespace drm::ad {

namespace {

const char* op_name(Tape::Op op) {
  switch (op) {
    case Tape::Op::Leaf: return "leaf";
    case Tape::Op::Affine: return "affine";
    case Tape::Op::ReluPower: return "relu-power";
    case Tape::Op::Sum: return "sum";
    case Tape::Op::Scale: return "scale";
    case Tape::Op::Product: return "product";
    case Tape::Op::Square: return "square";
    case Tape::Op::Reduce: return "reduce";
  }
  return "?";
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": operand shapes " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()) + " differ");
  }
}

}  // namespace

Var Tape::push(Node node, const char* name) {
  if (!node.value.allFinite()) {
    throw NumericOverflowError(nodes_.size(), name);
  }
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

bool Tape::needs(std::initializer_list<Var> vs) const {
  for (Var v : vs) {
    if (nodes_.at(v.id).needs_grad) return true;
  }
  return false;
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n), "constant");
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  return push(std::move(n), "parameter");
}

Var Tape::affine(Var weights, Var input) {
  const Matrix& w = value(weights);
  const Matrix& x = value(input);
  if (w.cols() != x.rows()) {
    throw ShapeError("affine: weights have " + std::to_string(w.cols()) + " columns, input has " +
                     std::to_string(x.rows()) + " rows");
  }
  Node n;
  n.op = Op::Affine;
  n.in[0] = weights.id;
  n.in[1] = input.id;
  n.arity = 2;
  n.needs_grad = needs({weights, input});
  n.value.noalias() = w * x;
  return push(std::move(n), "affine");
}

Var Tape::affine(Var weights, Var input, Var bias) {
  const Matrix& w = value(weights);
  const Matrix& x = value(input);
  const Matrix& b = value(bias);
  if (w.cols() != x.rows() || b.rows() != w.rows() || b.cols() != 1) {
    throw ShapeError("affine: incompatible weights/input/bias shapes");
  }
  Node n;
  n.op = Op::Affine;
  n.in[0] = weights.id;
  n.in[1] = input.id;
  n.in[2] = bias.id;
  n.arity = 3;
  n.needs_grad = needs({weights, input, bias});
  n.value.noalias() = w * x;
  n.value.colwise() += b.col(0);
  return push(std::move(n), "affine");
}

Var Tape::relu_power(Var x, int alpha) {
  if (alpha != 1 && alpha != 2) {
    throw DomainError("relu_power: alpha must be 1 or 2");
  }
  Node n;
  n.op = Op::ReluPower;
  n.in[0] = x.id;
  n.arity = 1;
  n.param = alpha;
  n.needs_grad = needs({x});
  const Matrix& xv = value(x);
  n.value = xv.cwiseMax(0.0);
  if (alpha == 2) n.value = n.value.cwiseAbs2();
  return push(std::move(n), "relu-power");
}

Var Tape::sum(Var a, Var b, double beta) {
  require_same_shape(value(a), value(b), "sum");
  Node n;
  n.op = Op::Sum;
  n.in[0] = a.id;
  n.in[1] = b.id;
  n.arity = 2;
  n.param = beta;
  n.needs_grad = needs({a, b});
  n.value = value(a) + beta * value(b);
  return push(std::move(n), "sum");
}

Var Tape::scale(Var a, double factor) {
  Node n;
  n.op = Op::Scale;
  n.in[0] = a.id;
  n.arity = 1;
  n.param = factor;
  n.needs_grad = needs({a});
  n.value = factor * value(a);
  return push(std::move(n), "scale");
}

Var Tape::product(Var a, Var b) {
  require_same_shape(value(a), value(b), "product");
  Node n;
  n.op = Op::Product;
  n.in[0] = a.id;
  n.in[1] = b.id;
  n.arity = 2;
  n.needs_grad = needs({a, b});
  n.value = value(a).cwiseProduct(value(b));
  return push(std::move(n), "product");
}

Var Tape::square(Var a) {
  Node n;
  n.op = Op::Square;
  n.in[0] = a.id;
  n.arity = 1;
  n.needs_grad = needs({a});
  n.value = value(a).cwiseAbs2();
  return push(std::move(n), "square");
}

Var Tape::reduce(Var a, Matrix weights) {
  require_same_shape(value(a), weights, "reduce");
  Node n;
  n.op = Op::Reduce;
  n.in[0] = a.id;
  n.arity = 1;
  n.needs_grad = needs({a});
  n.value = Matrix::Constant(1, 1, value(a).cwiseProduct(weights).sum());
  n.aux = std::move(weights);
  return push(std::move(n), "reduce");
}

Var Tape::reduce(Var a, double weight) {
  Node n;
  n.op = Op::Reduce;
  n.in[0] = a.id;
  n.arity = 1;
  n.param = weight;
  n.needs_grad = needs({a});
  n.value = Matrix::Constant(1, 1, weight * value(a).sum());
  return push(std::move(n), "reduce");
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw ShapeError("scalar: node is not 1x1");
  return m(0, 0);
}

const Matrix& Tape::adjoint(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.adjoint;
}

void Tape::accumulate(std::uint32_t id, const Matrix& contribution) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  if (n.adjoint.size() == 0) {
    n.adjoint = contribution;
  } else {
    n.adjoint += contribution;
  }
}

void Tape::backward(Var root) {
  if (consumed_) throw Error("backward: tape already consumed");
  if (value(root).size() != 1) throw ShapeError("backward: root must be 1x1");
  consumed_ = true;

  for (Node& n : nodes_) {
    n.adjoint = Matrix::Zero(n.value.rows(), n.value.cols());
  }
  nodes_[root.id].adjoint(0, 0) = 1.0;

  for (std::size_t k = root.id + 1; k-- > 0;) {
    Node& n = nodes_[k];
    if (!n.needs_grad || n.op == Op::Leaf) continue;
    const Matrix& g = n.adjoint;
    switch (n.op) {
      case Op::Affine: {
        const Matrix& w = nodes_[n.in[0]].value;
        const Matrix& x = nodes_[n.in[1]].value;
        if (nodes_[n.in[0]].needs_grad) nodes_[n.in[0]].adjoint.noalias() += g * x.transpose();
        if (nodes_[n.in[1]].needs_grad) nodes_[n.in[1]].adjoint.noalias() += w.transpose() * g;
        if (n.arity == 3 && nodes_[n.in[2]].needs_grad) nodes_[n.in[2]].adjoint += g.rowwise().sum();
        break;
      }
      case Op::ReluPower: {
        Node& in = nodes_[n.in[0]];
        if (!in.needs_grad) break;
        // Right-derivative convention: the slope of max(x,0) at 0 is taken as 0.
        if (n.param == 1.0) {
          in.adjoint += g.cwiseProduct((in.value.array() > 0.0).cast<double>().matrix());
        } else {
          in.adjoint += 2.0 * g.cwiseProduct(in.value.cwiseMax(0.0));
        }
        break;
      }
      case Op::Sum:
        accumulate(n.in[0], g);
        accumulate(n.in[1], n.param * g);
        break;
      case Op::Scale:
        accumulate(n.in[0], n.param * g);
        break;
      case Op::Product:
        if (nodes_[n.in[0]].needs_grad) nodes_[n.in[0]].adjoint += g.cwiseProduct(nodes_[n.in[1]].value);
        if (nodes_[n.in[1]].needs_grad) nodes_[n.in[1]].adjoint += g.cwiseProduct(nodes_[n.in[0]].value);
        break;
      case Op::Square:
        if (nodes_[n.in[0]].needs_grad) nodes_[n.in[0]].adjoint += 2.0 * nodes_[n.in[0]].value.cwiseProduct(g);
        break;
      case Op::Reduce: {
        Node& in = nodes_[n.in[0]];
        if (!in.needs_grad) break;
        if (n.aux.size() != 0) {
          in.adjoint += g(0, 0) * n.aux;
        } else {
          in.adjoint.array() += g(0, 0) * n.param;
        }
        break;
      }
      case Op::Leaf:
        break;
    }
    if (!n.adjoint.allFinite()) throw NumericOverflowError(k, std::string(op_name(n.op)) + " adjoint");
  }
}

ValueAndGradient grad_params(const ParametricLoss& loss, const ParameterSet& params) {
  Tape tape;
  std::vector<Var> handles;
  handles.reserve(params.size());
  for (const Matrix& p : params) {
    if (!p.allFinite()) throw DomainError("grad_params: non-finite parameter");
    handles.push_back(tape.parameter(p));
  }
  Var root = loss(tape, handles);
  tape.backward(root);

  ValueAndGradient out;
  out.value = tape.scalar(root);
  out.gradient.reserve(params.size());
  for (Var h : handles) out.gradient.push_back(tape.adjoint(h));
  return out;
}

std::size_t parameter_count(const ParameterSet& params) {
  std::size_t n = 0;
  for (const Matrix& p : params) n += static_cast<std::size_t>(p.size());
  return n;
}

Vector flatten(const ParameterSet& params) {
  Vector flat(static_cast<Eigen::Index>(parameter_count(params)));
  Eigen::Index at = 0;
  for (const Matrix& p : params) {
    flat.segment(at, p.size()) = p.reshaped();
    at += p.size();
  }
  return flat;
}

ParameterSet unflatten(const Vector& flat, const ParameterSet& shape) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count(shape)) {
    throw ShapeError("unflatten: size mismatch");
  }
  ParameterSet out;
  out.reserve(shape.size());
  Eigen::Index at = 0;
  for (const Matrix& p : shape) {
    out.push_back(flat.segment(at, p.size()).reshaped(p.rows(), p.cols()));
    at += p.size();
  }
  return out;
}

}  // namespace drm::ad
