#pragma once

// Helpers for writing exact network constructions.
//
// A construction proceeds stage by stage. Between stages, every quantity the
// next stage needs is held as an affine form over the outputs of the last
// built layer (or over the network input before the first layer).

#include <vector>

#include "drm/errors.hpp"
#include "drm/network.hpp"

namespace drm::detail {

struct Forms {
  Matrix coef;    // count x width
  Vector offset;  // count

  Eigen::Index count() const noexcept { return coef.rows(); }
  Eigen::Index width() const noexcept { return coef.cols(); }

  static Forms select(Eigen::Index width, Eigen::Index first, Eigen::Index count) {
    Forms f{Matrix::Zero(count, width), Vector::Zero(count)};
    for (Eigen::Index k = 0; k < count; ++k) f.coef(k, first + k) = 1.0;
    return f;
  }

  static Forms identity(Eigen::Index width) { return select(width, 0, width); }

  static Forms constant(Eigen::Index width, const Vector& values) {
    return Forms{Matrix::Zero(values.size(), width), values};
  }

  /// A * this + b
  Forms mapped(const Matrix& a, const Vector& b) const { return Forms{a * coef, a * offset + b}; }
  Forms mapped(const Matrix& a) const { return Forms{a * coef, a * offset}; }

  Forms scaled(double s) const { return Forms{s * coef, s * offset}; }
  Forms rows_scaled(const Vector& s) const {
    return Forms{s.asDiagonal() * coef, s.cwiseProduct(offset)};
  }

  Forms operator+(const Forms& o) const { return Forms{coef + o.coef, offset + o.offset}; }
  Forms operator-(const Forms& o) const { return Forms{coef - o.coef, offset - o.offset}; }
  Forms operator-() const { return Forms{-coef, -offset}; }
};

/// Collects unit blocks for one layer.
class LayerBuilder {
 public:
  explicit LayerBuilder(Eigen::Index in_dim) : in_dim_(in_dim) {}

  /// Appends units act(pre_k); returns the index of the first new unit.
  Eigen::Index add(const Forms& pre, Activation act) {
    if (pre.width() != in_dim_) throw ConstructionError("layer builder: form width mismatch");
    const Eigen::Index first = size_;
    blocks_.push_back(pre);
    acts_.insert(acts_.end(), static_cast<std::size_t>(pre.count()), act);
    size_ += pre.count();
    return first;
  }

  Eigen::Index size() const noexcept { return size_; }

  Layer build() const {
    Matrix w(size_, in_dim_);
    Vector b(size_);
    Eigen::Index at = 0;
    for (const Forms& f : blocks_) {
      w.middleRows(at, f.count()) = f.coef;
      b.segment(at, f.count()) = f.offset;
      at += f.count();
    }
    return Layer(std::move(w), std::move(b), acts_);
  }

 private:
  Eigen::Index in_dim_;
  Eigen::Index size_ = 0;
  std::vector<Forms> blocks_;
  std::vector<Activation> acts_;
};

/// x*y = 1/4 [s(x+y) + s(-x-y) - s(x-y) - s(y-x)], s = ReLU^2. Four units per pair.
inline Eigen::Index add_product(LayerBuilder& layer, const Forms& x, const Forms& y) {
  const Eigen::Index first = layer.add(x + y, Activation::Relu2);
  layer.add(-(x + y), Activation::Relu2);
  layer.add(x - y, Activation::Relu2);
  layer.add(y - x, Activation::Relu2);
  return first;
}

inline Forms product_result(Eigen::Index width, Eigen::Index first, Eigen::Index count) {
  return (Forms::select(width, first, count) + Forms::select(width, first + count, count) -
          Forms::select(width, first + 2 * count, count) -
          Forms::select(width, first + 3 * count, count))
      .scaled(0.25);
}

/// Signed pass-through with ReLU units: v = relu(v) - relu(-v).
inline Eigen::Index add_relu_carry(LayerBuilder& layer, const Forms& v) {
  const Eigen::Index first = layer.add(v, Activation::Relu);
  layer.add(-v, Activation::Relu);
  return first;
}

inline Forms relu_carry_result(Eigen::Index width, Eigen::Index first, Eigen::Index count) {
  return Forms::select(width, first, count) - Forms::select(width, first + count, count);
}

/// Pass-through of a non-negative value with ReLU^2 units:
/// v = 1/2 [s(v + 1) - s(v) - 1] for v >= 0.
inline Eigen::Index add_relu2_carry_nonneg(LayerBuilder& layer, const Forms& v) {
  const Eigen::Index first = layer.add(v + Forms::constant(v.width(), Vector::Ones(v.count())),
                                       Activation::Relu2);
  layer.add(v, Activation::Relu2);
  return first;
}

inline Forms relu2_carry_nonneg_result(Eigen::Index width, Eigen::Index first, Eigen::Index count) {
  Forms f = Forms::select(width, first, count) - Forms::select(width, first + count, count);
  f.offset.array() -= 1.0;
  return f.scaled(0.5);
}

/// Output layer realizing a set of single-row forms.
inline Layer output_layer(const Forms& f) {
  return Layer(f.coef, f.offset, Activation::Identity);
}

}  // namespace drm::detail
