// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/csm.hpp"

#include <string>

namespace shufflepose::csm {

std::vector<Index> shuffle_permutation(const ShuffleSpec& spec) {
  if (spec.groups <= 0 || spec.c_total <= 0) {
    throw ConfigError("shuffle_permutation: groups and channel total must be positive");
  }
  if (spec.c_total % spec.groups != 0) {
    throw ConfigError("shuffle_permutation: groups " + std::to_string(spec.groups) +
                      " does not divide channel total " + std::to_string(spec.c_total));
  }
  const Index g = spec.groups;
  const Index c = spec.c_total / g;
  std::vector<Index> perm(static_cast<std::size_t>(spec.c_total));
  for (Index i = 0; i < spec.c_total; ++i) {
    perm[static_cast<std::size_t>((i % c) * g + i / c)] = i;
  }
  return perm;
}

Tensor channel_shuffle(const Tensor& x, const ShuffleSpec& spec) {
  if (x.dims().c != spec.c_total) {
    throw ShapeError("channel_shuffle: tensor has " + std::to_string(x.dims().c) +
                     " channels but the shuffle covers " + std::to_string(spec.c_total));
  }
  return ops::permute_channels(x, shuffle_permutation(spec));
}

void validate_pyramid(const PyramidFeatures& p) {
  const Dims& d0 = p.levels[0].dims();
  for (std::size_t i = 1; i < p.levels.size(); ++i) {
    const Dims& d = p.levels[i].dims();
    const Dims& prev = p.levels[i - 1].dims();
    if (d.n != d0.n || d.c != d0.c) {
      throw ShapeError("pyramid level " + std::to_string(i + 2) +
                       " disagrees on batch or channel extent: " + to_string(d) + " vs " +
                       to_string(d0));
    }
    if (prev.h != d.h * 2 || prev.w != d.w * 2) {
      throw ShapeError("pyramid level " + std::to_string(i + 2) +
                       " does not halve the previous level's spatial extents: " +
                       to_string(d) + " after " + to_string(prev));
    }
  }
}

CsmParams make_csm(Index width, Rng& rng) {
  CsmParams p;
  for (auto& conv : p.fuse) {
    conv = layers::make_reduce(width, width, rng);
  }
  return p;
}

PyramidFeatures csm_forward(const PyramidFeatures& p, const ShuffleSpec& spec,
                            const CsmParams& params) {
  validate_pyramid(p);
  const Index width = p.levels[0].dims().c;
  if (spec.c_total != 4 * width) {
    throw ShapeError("csm_forward: shuffle must cover " + std::to_string(4 * width) +
                     " channels, spec covers " + std::to_string(spec.c_total));
  }

  // Lift every level to the finest resolution and fuse across levels.
  std::vector<Tensor> lifted;
  lifted.reserve(4);
  for (int i = 0; i < 4; ++i) {
    const int factor = 1 << i;
    lifted.push_back(i == 0 ? p.levels[0] : ops::upsample_nearest(p.levels[i], factor));
  }
  Tensor mixed = channel_shuffle(ops::concat_channels(lifted), spec);
  std::vector<Tensor> blocks = ops::split_channels(mixed, {width, width, width, width});

  PyramidFeatures out;
  for (int i = 0; i < 4; ++i) {
    const int factor = 1 << i;
    Tensor back = i == 0 ? blocks[0] : ops::downsample_avg(blocks[i], factor);
    Tensor fused = layers::reduce_1x1(back, params.fuse[static_cast<std::size_t>(i)]);
    out.levels[static_cast<std::size_t>(i)] =
        ops::concat_channels({fused, p.levels[static_cast<std::size_t>(i)]});
  }
  return out;
}

}  // namespace shufflepose::csm
