// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "shufflepose/attention.hpp"

using namespace shufflepose;

namespace {

Tensor rnd(Index n, Index c, Index h, Index w, Rng& rng) {
  Tensor t(n, c, h, w);
  for (Index i = 0; i < t.numel(); ++i) t.data()[i] = rng.uniform(-1.0, 1.0);
  return t;
}

Scalar max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.dims() == b.dims());
  Scalar worst = 0;
  for (Index i = 0; i < a.numel(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

void zero_block(attention::BlockParams& p) {
  p.bottleneck.reduce.weight.array().setZero();
  p.bottleneck.mid.weight.array().setZero();
  p.bottleneck.expand.weight.array().setZero();
  p.spatial.conv.weight.array().setZero();
  p.spatial.conv.bias.array().setZero();
  p.channel.fc1.weight.array().setZero();
  p.channel.fc1.bias.array().setZero();
  p.channel.fc2.weight.array().setZero();
  p.channel.fc2.bias.array().setZero();
}

}  // namespace

TEST_CASE("spatial gate: two-channel single-pixel hand case") {
  // Input (1, -1); a unit-weight zero-bias 1x1 conv sums the channels to 0,
  // so the gate is sigmoid(0) = 1/2 at the only position.
  Tensor v = Tensor::from({1, 2, 1, 1}, {1.0, -1.0});
  attention::SpatialAttnParams p;
  p.conv.weight = Tensor::from({1, 2, 1, 1}, {1.0, 1.0});
  p.conv.bias = Tensor::from({1, 1, 1, 1}, {0.0});
  Tensor out = attention::spatial_attention(v, p);
  CHECK(out.at(0, 0, 0, 0) == 0.5);
  CHECK(out.at(0, 1, 0, 0) == -0.5);
}

TEST_CASE("channel gate: constant channels through identity excitation") {
  // Channels hold constants 3 and 5; identity fully connected layers leave
  // the pooled vector untouched, so the gates are sigmoid(3), sigmoid(5).
  Tensor u(1, 2, 2, 2);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      u.at(0, 0, i, j) = 3.0;
      u.at(0, 1, i, j) = 5.0;
    }
  attention::ChannelAttnParams p;
  p.fc1.weight = Tensor::from({2, 2, 1, 1}, {1.0, 0.0, 0.0, 1.0});
  p.fc1.bias = Tensor(1, 2, 1, 1);
  p.fc2.weight = Tensor::from({2, 2, 1, 1}, {1.0, 0.0, 0.0, 1.0});
  p.fc2.bias = Tensor(1, 2, 1, 1);
  Tensor out = attention::channel_attention(u, p);
  const Scalar a0 = 1.0 / (1.0 + std::exp(-3.0));
  const Scalar a1 = 1.0 / (1.0 + std::exp(-5.0));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      CHECK(out.at(0, 0, i, j) == doctest::Approx(3.0 * a0).epsilon(1e-14));
      CHECK(out.at(0, 1, i, j) == doctest::Approx(5.0 * a1).epsilon(1e-14));
    }
}

TEST_CASE("zero attention parameters halve the signal per stage") {
  Rng rng(1);
  Tensor v = rnd(2, 4, 3, 3, rng);
  attention::SpatialAttnParams sp = attention::make_spatial_attn(4, rng);
  sp.conv.weight.array().setZero();
  sp.conv.bias.array().setZero();
  Tensor s = attention::spatial_attention(v, sp);
  CHECK(max_abs_diff(s, ops::scale(v, 0.5)) == 0.0);

  attention::ChannelAttnParams cp = attention::make_channel_attn(4, rng);
  cp.fc1.weight.array().setZero();
  cp.fc1.bias.array().setZero();
  cp.fc2.weight.array().setZero();
  cp.fc2.bias.array().setZero();
  Tensor c = attention::channel_attention(v, cp);
  CHECK(max_abs_diff(c, ops::scale(v, 0.5)) == 0.0);
}

TEST_CASE("with zero attention parameters both orderings collapse to the same block") {
  Rng rng(2);
  attention::BlockParams p = attention::make_block(8, 8, rng);
  // Keep bottleneck weights, zero only the gates: both gates become the
  // constant 1/2, so gating twice multiplies the branch by exactly 1/4.
  p.spatial.conv.weight.array().setZero();
  p.spatial.conv.bias.array().setZero();
  p.channel.fc1.weight.array().setZero();
  p.channel.fc1.bias.array().setZero();
  p.channel.fc2.weight.array().setZero();
  p.channel.fc2.bias.array().setZero();

  Tensor x = rnd(1, 8, 4, 4, rng);
  Tensor a = attention::scarb(x, p.bottleneck, p.spatial, p.channel);
  Tensor b = attention::csarb(x, p.bottleneck, p.spatial, p.channel);
  CHECK(max_abs_diff(a, b) == 0.0);  // bit-exact

  Tensor want = ops::relu(
      ops::add(x, ops::scale(layers::bottleneck_branch(x, p.bottleneck), 0.25)));
  CHECK(max_abs_diff(a, want) == 0.0);
}

TEST_CASE("with random parameters the two orderings differ") {
  Rng rng(3);
  int distinct = 0;
  for (int trial = 0; trial < 20; ++trial) {
    attention::BlockParams p = attention::make_block(8, 8, rng);
    // Random biases so the gates are not at their init value.
    for (Index i = 0; i < p.spatial.conv.bias.numel(); ++i)
      p.spatial.conv.bias.data()[i] = rng.uniform(-1.0, 1.0);
    for (Index i = 0; i < p.channel.fc2.bias.numel(); ++i)
      p.channel.fc2.bias.data()[i] = rng.uniform(-1.0, 1.0);
    Tensor x = rnd(1, 8, 4, 4, rng);
    Tensor a = attention::scarb(x, p.bottleneck, p.spatial, p.channel);
    Tensor b = attention::csarb(x, p.bottleneck, p.spatial, p.channel);
    if (max_abs_diff(a, b) > 1e-6) ++distinct;
  }
  CHECK(distinct >= 19);
}

TEST_CASE("gate values live strictly inside (0, 1)") {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor v = rnd(1, 4, 3, 3, rng);
    attention::SpatialAttnParams sp = attention::make_spatial_attn(4, rng);
    Tensor beta = ops::sigmoid(ops::conv2d(v, sp.conv.weight, sp.conv.bias, 1, 0));
    for (Index i = 0; i < beta.numel(); ++i) {
      CHECK(beta.data()[i] > 0.0);
      CHECK(beta.data()[i] < 1.0);
    }
    attention::ChannelAttnParams cp = attention::make_channel_attn(4, rng);
    Tensor alpha = ops::sigmoid(ops::fully_connected(
        ops::relu(ops::fully_connected(ops::global_avg_pool(v), cp.fc1.weight,
                                       cp.fc1.bias)),
        cp.fc2.weight, cp.fc2.bias));
    for (Index i = 0; i < alpha.numel(); ++i) {
      CHECK(alpha.data()[i] > 0.0);
      CHECK(alpha.data()[i] < 1.0);
    }
  }
}

TEST_CASE("variant names parse and print") {
  CHECK(attention::parse_variant("plain") == attention::Variant::kPlain);
  CHECK(attention::parse_variant("scarb") == attention::Variant::kScarb);
  CHECK(attention::parse_variant("csarb") == attention::Variant::kCsarb);
  CHECK_THROWS_AS(attention::parse_variant("sacrb"), ConfigError);
  CHECK(attention::variant_name(attention::Variant::kCsarb) == "csarb");
}

TEST_CASE("block_forward dispatches on the variant") {
  Rng rng(5);
  attention::BlockParams p = attention::make_block(8, 8, rng);
  Tensor x = rnd(1, 8, 3, 3, rng);
  CHECK(max_abs_diff(attention::block_forward(x, p, attention::Variant::kPlain),
                     layers::residual_bottleneck(x, p.bottleneck)) == 0.0);
  CHECK(max_abs_diff(attention::block_forward(x, p, attention::Variant::kScarb),
                     attention::scarb(x, p.bottleneck, p.spatial, p.channel)) == 0.0);
  CHECK(max_abs_diff(attention::block_forward(x, p, attention::Variant::kCsarb),
                     attention::csarb(x, p.bottleneck, p.spatial, p.channel)) == 0.0);
}

TEST_CASE("zero_block helper sanity: fully zeroed block is relu(x)") {
  Rng rng(6);
  attention::BlockParams p = attention::make_block(8, 8, rng);
  zero_block(p);
  Tensor x = rnd(1, 8, 3, 3, rng);
  // Branch is identically zero, so gating it changes nothing: relu(x + 0).
  CHECK(max_abs_diff(attention::scarb(x, p.bottleneck, p.spatial, p.channel),
                     ops::relu(x)) == 0.0);
}
