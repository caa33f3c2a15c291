// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameterized building blocks: residual bottleneck, 1x1 reducers, and
// prediction heads, composed from the tensor-core primitives.

#pragma once

#include <optional>

#include "shufflepose/ops.hpp"
#include "shufflepose/tensor.hpp"

namespace shufflepose::layers {

// A convolution's learnable state plus its fixed geometry.
struct ConvParams {
  Tensor weight;  // (c_out, c_in, kh, kw)
  Tensor bias;    // (1, c_out, 1, 1)
  int stride = 1;
  int pad = 0;
};

// A fully connected layer's learnable state; weight is square (C, C, 1, 1).
struct FcParams {
  Tensor weight;
  Tensor bias;  // (1, C, 1, 1)
};

// Kaiming-style fan-in scaled normal init: std = sqrt(2 / fan_in), where
// fan_in = c_in * kh * kw. Biases are left zero by the callers.
void kaiming_init(Tensor& weight, Rng& rng);

ConvParams make_conv(Index c_out, Index c_in, Index kh, Index kw, int stride,
                     int pad, Rng& rng);
FcParams make_fc(Index c, Rng& rng);

Tensor apply(const ConvParams& p, const Tensor& x);
Tensor apply(const FcParams& p, const Tensor& x);

// Rewrites a square 1x1 conv so it computes the identity map.
void identity_init_1x1(ConvParams& p);

// Rewrites a 1x1 conv so output channel i copies input channel src_offset + i.
void select_init_1x1(ConvParams& p, Index src_offset);

// Residual bottleneck: 1x1 reduce -> relu -> 3x3 -> relu -> 1x1 expand on the
// branch; identity path is a 1x1 projection iff channel counts differ. All
// convolutions are stride 1; spatial extents never change inside a block.
struct BottleneckParams {
  ConvParams reduce;  // 1x1, c_in -> c_out/4
  ConvParams mid;     // 3x3, c_out/4 -> c_out/4, pad 1
  ConvParams expand;  // 1x1, c_out/4 -> c_out
  std::optional<ConvParams> proj;  // 1x1, c_in -> c_out, present iff c_in != c_out
};

BottleneckParams make_bottleneck(Index c_in, Index c_out, Rng& rng);

// The non-identity branch F(x) = expand(relu(mid(relu(reduce(x))))).
Tensor bottleneck_branch(const Tensor& x, const BottleneckParams& p);

// The identity path: x itself, or proj(x) when channel counts differ.
Tensor bottleneck_identity(const Tensor& x, const BottleneckParams& p);

// relu(identity(x) + F(x)).
Tensor residual_bottleneck(const Tensor& x, const BottleneckParams& p);

// Thin wrapper over a 1x1 convolution used to align channel widths.
Tensor reduce_1x1(const Tensor& x, const ConvParams& p);
ConvParams make_reduce(Index c_in, Index to_channels, Rng& rng);

// Prediction head: 3x3 conv (c_in -> mid) then 1x1 conv (mid -> K), no
// activation — heatmaps are regressed as raw values.
struct HeadParams {
  ConvParams conv3;
  ConvParams conv1;
};

HeadParams make_head(Index c_in, Index mid, Index num_keypoints, Rng& rng);
Tensor head(const Tensor& x, const HeadParams& p);

}  // namespace shufflepose::layers
