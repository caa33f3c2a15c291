// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Object keypoint similarity and OKS-thresholded average precision / recall
// with 101-point precision-recall interpolation.

#pragma once

#include <string>
#include <vector>

#include "shufflepose/codec.hpp"

namespace shufflepose::oks {

// Per-keypoint falloff constants; all entries must be positive.
struct OksConstants {
  std::vector<Scalar> k;

  static OksConstants uniform(Index num_keypoints, Scalar value = 0.1);
  // The 17-keypoint constant vector used by the COCO evaluator.
  static OksConstants coco();
};

// Mean over visible ground-truth keypoints of exp(-d^2 / (2 * area * k_i^2)),
// distances in input pixels. The ground truth must have at least one visible
// keypoint; callers filter empty ground truths out beforehand.
Scalar oks(const codec::KeypointSet& pred, const codec::KeypointSet& gt,
           Scalar area, const OksConstants& consts);

// Tight axis-aligned box around the visible keypoints; area() scaled by the
// caller's factor stands in for a segmentation area.
struct Box {
  Scalar x = 0.0, y = 0.0, w = 0.0, h = 0.0;
  Scalar area() const { return w * h; }
};

Box tight_box(const codec::KeypointSet& kps);

struct Detection {
  Index image_id = 0;
  codec::KeypointSet kps;
  Scalar score = 0.0;
};

struct GroundTruth {
  Index image_id = 0;
  codec::KeypointSet kps;
  Scalar area = 0.0;
};

struct ApSummary {
  bool defined = false;  // false when there are no ground truths and no detections
  Scalar ap = 0.0;       // mean over thresholds
  Scalar ap50 = 0.0;
  Scalar ap75 = 0.0;
  Scalar ar = 0.0;       // mean recall over thresholds, max 20 detections/image
  std::vector<Scalar> per_threshold;
};

std::vector<Scalar> default_thresholds();  // 0.50, 0.55, ..., 0.95

// Per threshold: detections sorted by score descending are greedily matched
// to the unmatched ground truth (same image) of highest OKS >= threshold;
// the precision envelope is sampled at 101 recall points.
ApSummary average_precision(const std::vector<Detection>& preds,
                            const std::vector<GroundTruth>& gts,
                            const OksConstants& consts,
                            const std::vector<Scalar>& thresholds = default_thresholds(),
                            Index max_detections = 20);

// key=value lines: AP, AP50, AP75, AR (one per line).
std::string report_lines(const ApSummary& s);

}  // namespace shufflepose::oks
