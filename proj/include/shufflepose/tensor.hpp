// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <array>
#include <initializer_list>
#include <memory>
#include <vector>

#include "shufflepose/common.hpp"

namespace shufflepose {

// Rank-4 extents in (batch, channel, height, width) order.
struct Dims {
  Index n = 0, c = 0, h = 0, w = 0;

  Index numel() const { return n * c * h * w; }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

namespace detail {
struct TensorImpl {
  Dims dims;
  Eigen::ArrayXd data;  // row-major flat buffer, length dims.numel()
  Eigen::ArrayXd grad;  // empty until touched by a backward pass
};
}  // namespace detail

/// Dense rank-4 tensor of 64-bit floats with an optional gradient buffer.
///
/// A Tensor is a handle onto shared storage: copies are cheap and alias the
/// same buffer, `clone()` makes an independent deep copy. Like a smart
/// pointer, const-ness of the handle does not propagate to the storage —
/// accessors are const members returning mutable views. Handles may be moved
/// freely between threads as long as one thread mutates a given storage at a
/// time.
class Tensor {
 public:
  Tensor() = default;

  Tensor(Index n, Index c, Index h, Index w) : Tensor(Dims{n, c, h, w}) {}

  explicit Tensor(const Dims& d)
      : impl_(std::make_shared<detail::TensorImpl>()) {
    if (d.n < 0 || d.c < 0 || d.h < 0 || d.w < 0) {
      throw ShapeError("tensor extents must be non-negative, got " + to_string(d));
    }
    impl_->dims = d;
    impl_->data = Eigen::ArrayXd::Zero(d.numel());
  }

  static Tensor zeros(const Dims& d) { return Tensor(d); }

  static Tensor full(const Dims& d, Scalar v) {
    Tensor t(d);
    t.array().setConstant(v);
    return t;
  }

  // Row-major values; the flat length must equal d.numel().
  static Tensor from(const Dims& d, std::initializer_list<Scalar> vals) {
    Tensor t(d);
    if (static_cast<Index>(vals.size()) != d.numel()) {
      throw ShapeError("value count does not match extents " + to_string(d));
    }
    Index i = 0;
    for (Scalar v : vals) t.data()[i++] = v;
    return t;
  }

  static Tensor from(const Dims& d, const std::vector<Scalar>& vals) {
    Tensor t(d);
    if (static_cast<Index>(vals.size()) != d.numel()) {
      throw ShapeError("value count does not match extents " + to_string(d));
    }
    for (Index i = 0; i < t.numel(); ++i) t.data()[i] = vals[static_cast<std::size_t>(i)];
    return t;
  }

  bool defined() const { return impl_ != nullptr; }
  const Dims& dims() const { return impl_->dims; }
  Index numel() const { return impl_->dims.numel(); }

  Scalar* data() const { return impl_->data.data(); }

  Eigen::Map<Eigen::ArrayXd> array() const { return {data(), numel()}; }

  Index offset(Index n, Index c, Index h, Index w) const {
    const Dims& d = impl_->dims;
    return ((n * d.c + c) * d.h + h) * d.w + w;
  }

  Scalar& at(Index n, Index c, Index h, Index w) const { return data()[offset(n, c, h, w)]; }

  // Scalar convenience for (1,1,1,1) tensors (losses).
  Scalar value() const {
    if (numel() != 1) throw ShapeError("value() requires a scalar tensor, got " + to_string(dims()));
    return data()[0];
  }

  // --- gradient buffer ---

  bool has_grad() const { return impl_ && impl_->grad.size() == numel(); }

  // Allocates (zero-filled) on first use.
  Scalar* grad() const {
    ensure_grad();
    return impl_->grad.data();
  }

  Eigen::Map<Eigen::ArrayXd> grad_array() const {
    ensure_grad();
    return {impl_->grad.data(), numel()};
  }

  void ensure_grad() const {
    if (!has_grad()) impl_->grad = Eigen::ArrayXd::Zero(numel());
  }

  void zero_grad() const { impl_->grad = Eigen::ArrayXd::Zero(numel()); }

  void drop_grad() const { impl_->grad.resize(0); }

  // Deep copy of the values (the gradient buffer is not copied).
  Tensor clone() const {
    Tensor t(dims());
    t.array() = array();
    return t;
  }

  // Identity of the underlying storage, for aliasing checks.
  const void* id() const { return impl_.get(); }

  bool all_finite() const { return array().isFinite().all(); }

 private:
  std::shared_ptr<detail::TensorImpl> impl_;
};

}  // namespace shufflepose
