// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/attention.hpp"

namespace shufflepose::attention {

SpatialAttnParams make_spatial_attn(Index channels, Rng& rng) {
  SpatialAttnParams p;
  p.conv = layers::make_conv(1, channels, 1, 1, 1, 0, rng);
  return p;
}

ChannelAttnParams make_channel_attn(Index channels, Rng& rng) {
  ChannelAttnParams p;
  p.fc1 = layers::make_fc(channels, rng);
  p.fc2 = layers::make_fc(channels, rng);
  return p;
}

Tensor spatial_attention(const Tensor& v, const SpatialAttnParams& p) {
  Tensor beta = ops::sigmoid(layers::apply(p.conv, v));  // (n, 1, h, w)
  return ops::mul(v, beta);
}

Tensor channel_attention(const Tensor& u, const ChannelAttnParams& p) {
  Tensor z = ops::global_avg_pool(u);  // (n, c, 1, 1)
  Tensor alpha = ops::sigmoid(layers::apply(p.fc2, ops::relu(layers::apply(p.fc1, z))));
  return ops::mul(u, alpha);
}

Tensor scarb(const Tensor& x, const layers::BottleneckParams& bp,
             const SpatialAttnParams& sp, const ChannelAttnParams& cp) {
  Tensor branch = layers::bottleneck_branch(x, bp);
  Tensor gated = channel_attention(spatial_attention(branch, sp), cp);
  return ops::relu(ops::add(layers::bottleneck_identity(x, bp), gated));
}

Tensor csarb(const Tensor& x, const layers::BottleneckParams& bp,
             const SpatialAttnParams& sp, const ChannelAttnParams& cp) {
  Tensor branch = layers::bottleneck_branch(x, bp);
  Tensor gated = spatial_attention(channel_attention(branch, cp), sp);
  return ops::relu(ops::add(layers::bottleneck_identity(x, bp), gated));
}

Variant parse_variant(const std::string& name) {
  if (name == "plain") return Variant::kPlain;
  if (name == "scarb") return Variant::kScarb;
  if (name == "csarb") return Variant::kCsarb;
  throw ConfigError("unknown block variant '" + name + "' (expected plain, scarb, or csarb)");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kPlain: return "plain";
    case Variant::kScarb: return "scarb";
    case Variant::kCsarb: return "csarb";
  }
  throw ConfigError("unhandled block variant value");
}

BlockParams make_block(Index c_in, Index c_out, Rng& rng) {
  BlockParams p;
  p.bottleneck = layers::make_bottleneck(c_in, c_out, rng);
  p.spatial = make_spatial_attn(c_out, rng);
  p.channel = make_channel_attn(c_out, rng);
  return p;
}

Tensor block_forward(const Tensor& x, const BlockParams& p, Variant v) {
  switch (v) {
    case Variant::kPlain: return layers::residual_bottleneck(x, p.bottleneck);
    case Variant::kScarb: return scarb(x, p.bottleneck, p.spatial, p.channel);
    case Variant::kCsarb: return csarb(x, p.bottleneck, p.spatial, p.channel);
  }
  throw ConfigError("unhandled block variant value");
}

}  // namespace shufflepose::attention
