// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shufflepose::codec {

namespace {
constexpr Scalar kStride = 4.0;
}

EncodeResult encode(const KeypointSet& kps, Index out_h, Index out_w, Scalar sigma) {
  if (sigma <= 0.0) {
    throw ConfigError("encode: sigma must be positive, got " + std::to_string(sigma));
  }
  if (out_h < 1 || out_w < 1) {
    throw ShapeError("encode: output grid must be non-empty");
  }
  const Index K = static_cast<Index>(kps.pts.size());
  EncodeResult res;
  res.heatmaps = Tensor(1, K, out_h, out_w);
  const Scalar denom = 2.0 * sigma * sigma;
  for (Index j = 0; j < K; ++j) {
    const Keypoint& kp = kps.pts[static_cast<std::size_t>(j)];
    if (kp.v <= 0) continue;
    // Center on the nearest grid point so the peak value is exactly 1.
    Index ci = static_cast<Index>(std::llround(kp.y / kStride));
    Index cj = static_cast<Index>(std::llround(kp.x / kStride));
    if (ci < 0 || ci >= out_h || cj < 0 || cj >= out_w) {
      ++res.clamped;
      ci = std::clamp<Index>(ci, 0, out_h - 1);
      cj = std::clamp<Index>(cj, 0, out_w - 1);
    }
    for (Index i = 0; i < out_h; ++i) {
      const Scalar dy = static_cast<Scalar>(i - ci);
      for (Index w = 0; w < out_w; ++w) {
        const Scalar dx = static_cast<Scalar>(w - cj);
        res.heatmaps.at(0, j, i, w) = std::exp(-(dy * dy + dx * dx) / denom);
      }
    }
  }
  return res;
}

DecodeResult decode(const Tensor& heatmaps, bool neighborhood) {
  const Dims& d = heatmaps.dims();
  if (d.n != 1) {
    throw ShapeError("decode: expected a single heatmap stack (1, K, h, w), got " +
                     to_string(d));
  }
  if (!heatmaps.all_finite()) {
    throw NumericError("decode: heatmaps contain NaN or Inf");
  }
  const Index plane = d.h * d.w;
  DecodeResult res;
  res.kps.pts.resize(static_cast<std::size_t>(d.c));
  res.scores.resize(static_cast<std::size_t>(d.c));
  for (Index j = 0; j < d.c; ++j) {
    const Scalar* p = heatmaps.data() + heatmaps.offset(0, j, 0, 0);

    // Global argmax; strict comparison keeps the lowest flat index on ties.
    Index best = 0;
    for (Index i = 1; i < plane; ++i) {
      if (p[i] > p[best]) best = i;
    }

    // Second-highest response, globally or over the 3x3 ring around best.
    Index second = -1;
    const Index by = best / d.w, bx = best % d.w;
    if (neighborhood) {
      for (Index dy = -1; dy <= 1; ++dy) {
        for (Index dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const Index y = by + dy, x = bx + dx;
          if (y < 0 || y >= d.h || x < 0 || x >= d.w) continue;
          const Index i = y * d.w + x;
          if (second < 0 || p[i] > p[second]) second = i;
        }
      }
    } else {
      for (Index i = 0; i < plane; ++i) {
        if (i == best) continue;
        if (second < 0 || p[i] > p[second]) second = i;
      }
    }

    Scalar gy = static_cast<Scalar>(by);
    Scalar gx = static_cast<Scalar>(bx);
    if (second >= 0) {
      const Scalar dy = static_cast<Scalar>(second / d.w) - gy;
      const Scalar dx = static_cast<Scalar>(second % d.w) - gx;
      const Scalar norm = std::sqrt(dy * dy + dx * dx);
      if (norm > 0.0) {
        gy += 0.25 * dy / norm;
        gx += 0.25 * dx / norm;
      }
    }

    Keypoint& kp = res.kps.pts[static_cast<std::size_t>(j)];
    kp.x = gx * kStride;
    kp.y = gy * kStride;
    kp.v = 2;
    res.scores[static_cast<std::size_t>(j)] = p[best];

    Scalar lo = p[0], hi = p[0];
    for (Index i = 1; i < plane; ++i) {
      lo = std::min(lo, p[i]);
      hi = std::max(hi, p[i]);
    }
    if (lo == hi) ++res.low_confidence;
  }
  return res;
}

Tensor mirror_horizontal(const Tensor& x) {
  const Dims& d = x.dims();
  Tensor out(d);
  for (Index n = 0; n < d.n; ++n) {
    for (Index c = 0; c < d.c; ++c) {
      for (Index h = 0; h < d.h; ++h) {
        const Scalar* src = x.data() + x.offset(n, c, h, 0);
        Scalar* dst = out.data() + out.offset(n, c, h, 0);
        for (Index w = 0; w < d.w; ++w) {
          dst[w] = src[d.w - 1 - w];
        }
      }
    }
  }
  return out;
}

Tensor flip_average(const std::function<Tensor(const Tensor&)>& net,
                    const Tensor& image,
                    const std::vector<std::pair<Index, Index>>& flip_pairs) {
  Tensor direct = net(image);
  Tensor flipped = mirror_horizontal(net(mirror_horizontal(image)));

  const Index K = direct.dims().c;
  std::vector<Index> swap(static_cast<std::size_t>(K));
  for (Index j = 0; j < K; ++j) swap[static_cast<std::size_t>(j)] = j;
  for (const auto& [a, b] : flip_pairs) {
    if (a < 0 || a >= K || b < 0 || b >= K) {
      throw ConfigError("flip_average: pair (" + std::to_string(a) + ", " +
                        std::to_string(b) + ") outside the " + std::to_string(K) +
                        " keypoint channels");
    }
    swap[static_cast<std::size_t>(a)] = b;
    swap[static_cast<std::size_t>(b)] = a;
  }
  for (Index j = 0; j < K; ++j) {
    if (swap[static_cast<std::size_t>(swap[static_cast<std::size_t>(j)])] != j) {
      throw ConfigError("flip_average: flip pairs are not an involution at channel " +
                        std::to_string(j));
    }
  }

  if (flipped.dims() != direct.dims()) {
    throw ShapeError("flip_average: the net changed output dims between passes");
  }
  Tensor swapped(flipped.dims());
  const Dims& d = flipped.dims();
  const Index plane = d.h * d.w;
  for (Index n = 0; n < d.n; ++n) {
    for (Index c = 0; c < d.c; ++c) {
      std::copy_n(flipped.data() + flipped.offset(n, swap[static_cast<std::size_t>(c)], 0, 0),
                  plane, swapped.data() + swapped.offset(n, c, 0, 0));
    }
  }

  Tensor out(d);
  out.array() = 0.5 * (direct.array() + swapped.array());
  return out;
}

}  // namespace shufflepose::codec
