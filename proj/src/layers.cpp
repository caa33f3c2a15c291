// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/layers.hpp"

#include <cmath>
#include <string>

namespace shufflepose::layers {

void kaiming_init(Tensor& weight, Rng& rng) {
  const Dims& d = weight.dims();
  const Index fan_in = d.c * d.h * d.w;
  const Scalar std = std::sqrt(2.0 / static_cast<Scalar>(fan_in));
  Scalar* p = weight.data();
  for (Index i = 0; i < weight.numel(); ++i) {
    p[i] = std * rng.normal();
  }
}

ConvParams make_conv(Index c_out, Index c_in, Index kh, Index kw, int stride,
                     int pad, Rng& rng) {
  ConvParams p;
  p.weight = Tensor(c_out, c_in, kh, kw);
  p.bias = Tensor(1, c_out, 1, 1);
  p.stride = stride;
  p.pad = pad;
  kaiming_init(p.weight, rng);
  return p;
}

FcParams make_fc(Index c, Rng& rng) {
  FcParams p;
  p.weight = Tensor(c, c, 1, 1);
  p.bias = Tensor(1, c, 1, 1);
  kaiming_init(p.weight, rng);
  return p;
}

Tensor apply(const ConvParams& p, const Tensor& x) {
  return ops::conv2d(x, p.weight, p.bias, p.stride, p.pad);
}

Tensor apply(const FcParams& p, const Tensor& x) {
  return ops::fully_connected(x, p.weight, p.bias);
}

void identity_init_1x1(ConvParams& p) {
  select_init_1x1(p, 0);
}

void select_init_1x1(ConvParams& p, Index src_offset) {
  const Dims& d = p.weight.dims();
  if (d.h != 1 || d.w != 1) {
    throw ShapeError("select_init_1x1: kernel must be 1x1, got " + to_string(d));
  }
  if (src_offset < 0 || src_offset + d.n > d.c) {
    throw ShapeError("select_init_1x1: source range [" + std::to_string(src_offset) +
                     ", " + std::to_string(src_offset + d.n) + ") exceeds " +
                     std::to_string(d.c) + " input channels");
  }
  p.weight.array().setZero();
  p.bias.array().setZero();
  for (Index i = 0; i < d.n; ++i) {
    p.weight.at(i, src_offset + i, 0, 0) = 1.0;
  }
}

BottleneckParams make_bottleneck(Index c_in, Index c_out, Rng& rng) {
  if (c_out % 4 != 0) {
    throw ShapeError("make_bottleneck: output channels must be divisible by 4, got " +
                     std::to_string(c_out));
  }
  const Index mid = c_out / 4;
  BottleneckParams p;
  p.reduce = make_conv(mid, c_in, 1, 1, 1, 0, rng);
  p.mid = make_conv(mid, mid, 3, 3, 1, 1, rng);
  p.expand = make_conv(c_out, mid, 1, 1, 1, 0, rng);
  if (c_in != c_out) {
    p.proj = make_conv(c_out, c_in, 1, 1, 1, 0, rng);
  }
  return p;
}

Tensor bottleneck_branch(const Tensor& x, const BottleneckParams& p) {
  Tensor h = ops::relu(apply(p.reduce, x));
  h = ops::relu(apply(p.mid, h));
  return apply(p.expand, h);
}

Tensor bottleneck_identity(const Tensor& x, const BottleneckParams& p) {
  if (p.proj) return apply(*p.proj, x);
  if (x.dims().c != p.expand.weight.dims().n) {
    throw ShapeError("residual_bottleneck: input has " + std::to_string(x.dims().c) +
                     " channels, block emits " + std::to_string(p.expand.weight.dims().n) +
                     " and carries no projection");
  }
  return x;
}

Tensor residual_bottleneck(const Tensor& x, const BottleneckParams& p) {
  return ops::relu(ops::add(bottleneck_identity(x, p), bottleneck_branch(x, p)));
}

Tensor reduce_1x1(const Tensor& x, const ConvParams& p) {
  const Dims& wd = p.weight.dims();
  if (wd.h != 1 || wd.w != 1) {
    throw ShapeError("reduce_1x1: kernel must be 1x1, got " + to_string(wd));
  }
  return apply(p, x);
}

ConvParams make_reduce(Index c_in, Index to_channels, Rng& rng) {
  return make_conv(to_channels, c_in, 1, 1, 1, 0, rng);
}

HeadParams make_head(Index c_in, Index mid, Index num_keypoints, Rng& rng) {
  HeadParams p;
  p.conv3 = make_conv(mid, c_in, 3, 3, 1, 1, rng);
  p.conv1 = make_conv(num_keypoints, mid, 1, 1, 1, 0, rng);
  return p;
}

Tensor head(const Tensor& x, const HeadParams& p) {
  return apply(p.conv1, apply(p.conv3, x));
}

}  // namespace shufflepose::layers
