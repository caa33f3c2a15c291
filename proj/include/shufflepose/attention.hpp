// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Spatial attention, channel-wise attention, and their two residual
// bottleneck compositions. Each attention stage computes its gate from the
// feature map it receives, so the two stage orderings are inequivalent.

#pragma once

#include <string>

#include "shufflepose/layers.hpp"

namespace shufflepose::attention {

// 1x1 convolution squashing C channels into a single-channel gate map.
struct SpatialAttnParams {
  layers::ConvParams conv;  // weight (1, C, 1, 1)
};

// Two square fully connected layers over pooled channel statistics.
struct ChannelAttnParams {
  layers::FcParams fc1;
  layers::FcParams fc2;
};

SpatialAttnParams make_spatial_attn(Index channels, Rng& rng);
ChannelAttnParams make_channel_attn(Index channels, Rng& rng);

// beta = sigmoid(conv1x1(v)); output(c,i,j) = beta(i,j) * v(c,i,j).
Tensor spatial_attention(const Tensor& v, const SpatialAttnParams& p);

// z = global average pool; alpha = sigmoid(fc2(relu(fc1(z))));
// output(c,i,j) = alpha(c) * u(c,i,j).
Tensor channel_attention(const Tensor& u, const ChannelAttnParams& p);

// Residual bottleneck with the branch gated spatially first, then
// channel-wise: relu(identity(x) + chan_attn(spat_attn(F(x)))).
Tensor scarb(const Tensor& x, const layers::BottleneckParams& bp,
             const SpatialAttnParams& sp, const ChannelAttnParams& cp);

// Same composition with the two attention stages swapped.
Tensor csarb(const Tensor& x, const layers::BottleneckParams& bp,
             const SpatialAttnParams& sp, const ChannelAttnParams& cp);

// Which bottleneck flavor a network block runs.
enum class Variant { kPlain, kScarb, kCsarb };

Variant parse_variant(const std::string& name);  // "plain" | "scarb" | "csarb"
std::string variant_name(Variant v);

// One block's full parameter set. Plain blocks simply never touch the
// attention members (they are still allocated so checkpoints keep a stable
// schema across variants).
struct BlockParams {
  layers::BottleneckParams bottleneck;
  SpatialAttnParams spatial;
  ChannelAttnParams channel;
};

BlockParams make_block(Index c_in, Index c_out, Rng& rng);

// Dispatch: kPlain -> residual_bottleneck, kScarb -> scarb, kCsarb -> csarb.
Tensor block_forward(const Tensor& x, const BlockParams& p, Variant v);

}  // namespace shufflepose::attention
