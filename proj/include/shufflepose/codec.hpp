// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Ground-truth heatmap encoding, sub-pixel keypoint decoding, and
// flip-averaged inference.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "shufflepose/tensor.hpp"

namespace shufflepose::codec {

// One keypoint in input-pixel coordinates. v: 0 = not labeled (excluded
// everywhere), 1 = labeled but occluded, 2 = labeled and visible.
struct Keypoint {
  Scalar x = 0.0;
  Scalar y = 0.0;
  int v = 0;
};

struct KeypointSet {
  std::vector<Keypoint> pts;
};

// Output grid sits at input/4. Each visible keypoint becomes a unit-peak
// Gaussian centered on the nearest grid point; invisible keypoints leave
// their channel zero. Centers falling outside the grid are clamped onto it
// and counted in `clamped`.
struct EncodeResult {
  Tensor heatmaps;  // (1, K, out_h, out_w)
  Index clamped = 0;
};

EncodeResult encode(const KeypointSet& kps, Index out_h, Index out_w, Scalar sigma);

// Decoded keypoints with per-keypoint confidence. A channel whose values are
// all equal decodes by tie-break (lowest flat index) and is flagged.
struct DecodeResult {
  KeypointSet kps;                // v = 2 for every decoded keypoint
  std::vector<Scalar> scores;     // peak heatmap value per keypoint
  Index low_confidence = 0;       // count of all-equal channels
};

// Per channel: global argmax p1, second-highest response p2 (ties at either
// rank go to the lowest flat index), keypoint = (p1 + 0.25 * unit(p2 - p1))
// scaled back to input pixels by the stride of 4. When `neighborhood` is
// set, p2 is searched only in the 3x3 ring around p1 instead of globally.
DecodeResult decode(const Tensor& heatmaps, bool neighborhood = false);

// Runs `net` on the image and on its horizontal mirror, un-mirrors the
// second heatmap stack (x -> w-1-x), swaps the paired channels (left/right
// joints), and averages the two stacks. flip_pairs must be an involution.
Tensor flip_average(const std::function<Tensor(const Tensor&)>& net,
                    const Tensor& image,
                    const std::vector<std::pair<Index, Index>>& flip_pairs);

// Horizontal mirror of the width axis (helper shared with tests).
Tensor mirror_horizontal(const Tensor& x);

}  // namespace shufflepose::codec
