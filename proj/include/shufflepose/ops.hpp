// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "shufflepose/autograd.hpp"
#include "shufflepose/tensor.hpp"

namespace shufflepose::ops {

/// 2D convolution over NCHW tensors.
///
/// weight is (c_out, c_in, kh, kw), bias is (1, c_out, 1, 1). Output spatial
/// extents follow floor((H + 2*pad - k) / stride) + 1. Accumulation order per
/// output element is (c_in, kh, kw) with the bias added first, so results are
/// reproducible bit-for-bit across runs.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride = 1, int pad = 0);

/// Affine map on per-sample channel vectors: y = W x + b.
///
/// input is (n, C, 1, 1); weight is a square (C, C, 1, 1); bias (1, C, 1, 1).
Tensor fully_connected(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);

/// Numerically stable logistic; outputs lie strictly in (0, 1) for inputs of
/// ordinary magnitude.
Tensor sigmoid(const Tensor& x);

/// Mean over the spatial extent per (sample, channel); output is (n, c, 1, 1).
Tensor global_avg_pool(const Tensor& x);

/// Nearest-neighbor replication by an integer factor on both spatial axes.
Tensor upsample_nearest(const Tensor& x, int factor);

/// Non-overlapping window average by an integer factor; spatial extents must
/// be divisible by the factor. Exact inverse of upsample_nearest with the
/// same factor.
Tensor downsample_avg(const Tensor& x, int factor);

/// Channel-axis concatenation. Inputs must agree on n, h, w.
Tensor concat_channels(const std::vector<Tensor>& xs);

/// Channel-axis partition into blocks of the given sizes (must sum to c).
std::vector<Tensor> split_channels(const Tensor& x, const std::vector<Index>& sizes);

/// Permutes channels: output channel p holds input channel perm[p].
/// perm must be a bijection on [0, c).
Tensor permute_channels(const Tensor& x, const std::vector<Index>& perm);

// Elementwise add / mul. b may have the same dims as a, or broadcast as a
// per-channel vector (n, c, 1, 1) or a per-position map (n, 1, h, w); the
// adjoint sums over the broadcast axes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);

/// Multiply by a compile-time constant (not a learnable tensor).
Tensor scale(const Tensor& x, Scalar k);

/// Sum of all elements, as a (1,1,1,1) tensor.
Tensor sum(const Tensor& x);

}  // namespace shufflepose::ops
