// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "shufflepose/layers.hpp"

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

}  // namespace

TEST_CASE("make_conv shapes and zero bias") {
  Rng rng(1);
  layers::ConvParams p = layers::make_conv(6, 3, 3, 3, 2, 1, rng);
  CHECK(p.weight.dims() == Dims{6, 3, 3, 3});
  CHECK(p.bias.dims() == Dims{1, 6, 1, 1});
  CHECK(p.stride == 2);
  CHECK(p.pad == 1);
  for (Index i = 0; i < p.bias.numel(); ++i) CHECK(p.bias.data()[i] == 0.0);
}

TEST_CASE("kaiming init is deterministic in the rng and scaled by fan-in") {
  Rng a(7), b(7);
  layers::ConvParams p = layers::make_conv(8, 4, 3, 3, 1, 1, a);
  layers::ConvParams q = layers::make_conv(8, 4, 3, 3, 1, 1, b);
  CHECK(max_abs_diff(p.weight, q.weight) == 0.0);

  // Sample standard deviation should be near sqrt(2 / fan_in).
  const Scalar want_std = std::sqrt(2.0 / (4 * 3 * 3));
  Scalar mean = 0;
  for (Index i = 0; i < p.weight.numel(); ++i) mean += p.weight.data()[i];
  mean /= static_cast<Scalar>(p.weight.numel());
  Scalar var = 0;
  for (Index i = 0; i < p.weight.numel(); ++i) {
    const Scalar d = p.weight.data()[i] - mean;
    var += d * d;
  }
  var /= static_cast<Scalar>(p.weight.numel() - 1);
  CHECK(std::sqrt(var) == doctest::Approx(want_std).epsilon(0.25));
}

TEST_CASE("apply(ConvParams) forwards stride and pad") {
  Rng rng(2);
  layers::ConvParams p = layers::make_conv(2, 3, 3, 3, 2, 1, rng);
  Tensor x = rnd(1, 3, 8, 6, rng);
  Tensor y = layers::apply(p, x);
  Tensor want = ops::conv2d(x, p.weight, p.bias, 2, 1);
  CHECK(max_abs_diff(y, want) == 0.0);
}

TEST_CASE("identity 1x1 init reproduces its input") {
  Rng rng(3);
  layers::ConvParams p = layers::make_conv(4, 4, 1, 1, 1, 0, rng);
  layers::identity_init_1x1(p);
  Tensor x = rnd(2, 4, 3, 3, rng);
  CHECK(max_abs_diff(layers::apply(p, x), x) == 0.0);
}

TEST_CASE("select 1x1 init picks a channel window") {
  Rng rng(4);
  layers::ConvParams p = layers::make_conv(2, 6, 1, 1, 1, 0, rng);
  layers::select_init_1x1(p, 3);
  Tensor x = rnd(1, 6, 2, 2, rng);
  Tensor y = layers::apply(p, x);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      CHECK(y.at(0, 0, i, j) == x.at(0, 3, i, j));
      CHECK(y.at(0, 1, i, j) == x.at(0, 4, i, j));
    }
}

TEST_CASE("bottleneck plan: quarter-width middle, optional projection") {
  Rng rng(5);
  layers::BottleneckParams same = layers::make_bottleneck(8, 8, rng);
  CHECK(same.reduce.weight.dims() == Dims{2, 8, 1, 1});
  CHECK(same.mid.weight.dims() == Dims{2, 2, 3, 3});
  CHECK(same.expand.weight.dims() == Dims{8, 2, 1, 1});
  CHECK_FALSE(same.proj.has_value());

  layers::BottleneckParams grow = layers::make_bottleneck(4, 8, rng);
  REQUIRE(grow.proj.has_value());
  CHECK(grow.proj->weight.dims() == Dims{8, 4, 1, 1});

  CHECK_THROWS_AS(layers::make_bottleneck(4, 6, rng), ShapeError);
}

TEST_CASE("zero-parameter bottleneck reduces to relu of the input") {
  Rng rng(6);
  layers::BottleneckParams p = layers::make_bottleneck(8, 8, rng);
  p.reduce.weight.array().setZero();
  p.mid.weight.array().setZero();
  p.expand.weight.array().setZero();
  Tensor x = rnd(2, 8, 4, 4, rng);
  Tensor y = layers::residual_bottleneck(x, p);
  Tensor want = ops::relu(x);
  CHECK(max_abs_diff(y, want) == 0.0);
}

TEST_CASE("bottleneck identity path shape-checks when projection is absent") {
  Rng rng(7);
  layers::BottleneckParams p = layers::make_bottleneck(8, 8, rng);
  CHECK_THROWS_AS(layers::bottleneck_identity(rnd(1, 4, 3, 3, rng), p), ShapeError);
}

TEST_CASE("residual bottleneck with projection changes width") {
  Rng rng(8);
  layers::BottleneckParams p = layers::make_bottleneck(4, 8, rng);
  Tensor x = rnd(1, 4, 5, 5, rng);
  Tensor y = layers::residual_bottleneck(x, p);
  CHECK(y.dims() == Dims{1, 8, 5, 5});
  // relu output: non-negative everywhere
  for (Index i = 0; i < y.numel(); ++i) CHECK(y.data()[i] >= 0.0);
}

TEST_CASE("reduce_1x1 rejects non-pointwise parameters") {
  Rng rng(9);
  layers::ConvParams p = layers::make_conv(2, 4, 3, 3, 1, 1, rng);
  CHECK_THROWS_AS(layers::reduce_1x1(rnd(1, 4, 3, 3, rng), p), ShapeError);
}

TEST_CASE("head is two stacked convolutions with no activation") {
  Rng rng(10);
  layers::HeadParams p = layers::make_head(6, 4, 17, rng);
  Tensor x = rnd(1, 6, 5, 5, rng);
  Tensor y = layers::head(x, p);
  CHECK(y.dims() == Dims{1, 17, 5, 5});
  Tensor want = ops::conv2d(ops::conv2d(x, p.conv3.weight, p.conv3.bias, 1, 1),
                            p.conv1.weight, p.conv1.bias, 1, 0);
  CHECK(max_abs_diff(y, want) == 0.0);
  // No activation: some outputs of a random head should be negative.
  bool any_negative = false;
  for (Index i = 0; i < y.numel(); ++i) any_negative = any_negative || y.data()[i] < 0;
  CHECK(any_negative);
}
