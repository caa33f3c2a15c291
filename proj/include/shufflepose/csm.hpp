// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Channel shuffle over the channel axis and the pyramid-level fusion module
// built on it: align all levels to the finest resolution, concatenate,
// shuffle, split, resample back, fuse with 1x1 convolutions, and concatenate
// with the original per-level features.

#pragma once

#include <array>
#include <vector>

#include "shufflepose/layers.hpp"

namespace shufflepose::csm {

// Fixed permutation family: reshape the channel axis to (groups, c),
// transpose, flatten. groups must divide c_total.
struct ShuffleSpec {
  Index groups;
  Index c_total;
};

// perm[p] is the source channel for destination p. Source i lands at
// destination (i mod c) * g + floor(i / c) with c = c_total / g.
std::vector<Index> shuffle_permutation(const ShuffleSpec& spec);

// Applies the permutation to the channel axis; values are untouched and the
// adjoint routes gradients through the inverse permutation.
Tensor channel_shuffle(const Tensor& x, const ShuffleSpec& spec);

// Four pyramid levels, finest first. levels[i] sits at stride 2^(i+2); all
// levels share the batch extent and a common channel width, and spatial
// extents halve exactly level-to-level.
struct PyramidFeatures {
  std::array<Tensor, 4> levels;
};

void validate_pyramid(const PyramidFeatures& p);

// Per-level 1x1 fusion convolutions applied to the resampled shuffle blocks.
struct CsmParams {
  std::array<layers::ConvParams, 4> fuse;  // width -> width each
};

CsmParams make_csm(Index width, Rng& rng);

// Output level i = concat(fused shuffle block i, input level i): channel
// width doubles, spatial extents are preserved.
PyramidFeatures csm_forward(const PyramidFeatures& p, const ShuffleSpec& spec,
                            const CsmParams& params);

}  // namespace shufflepose::csm
