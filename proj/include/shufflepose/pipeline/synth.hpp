// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic stick-figure dataset: randomized skeletons posed by forward
// kinematics, rendered as anti-aliased line segments over noise backgrounds.
// The kinematics are exposed so tests can recompute joint positions
// independently of the renderer.

#pragma once

#include <vector>

#include "shufflepose/codec.hpp"
#include "shufflepose/oks.hpp"
#include "shufflepose/pipeline/config.hpp"

namespace shufflepose::pipeline {

// Keypoint order used throughout: 0 nose, 1 left eye, 2 right eye, 3 left
// ear, 4 right ear, 5/6 shoulders, 7/8 elbows, 9/10 wrists, 11/12 hips,
// 13/14 knees, 15/16 ankles (left before right).
inline constexpr Index kNumJoints = 17;

// Pose and proportions of one figure. Limb angles are absolute, in radians,
// measured so 0 points straight down the image and positive turns toward
// +x ("dir(a) = (sin a, cos a)" in (x, y)).
struct FigureSpec {
  Scalar cx = 0, cy = 0;      // pelvis midpoint, input px
  Scalar torso_len = 0;       // pelvis -> neck
  Scalar torso_lean = 0;      // radians off vertical; positive leans toward +x
  Scalar head_len = 0;        // neck -> nose
  Scalar shoulder_w = 0, hip_w = 0;
  Scalar upper_arm = 0, forearm = 0, thigh = 0, shin = 0;
  Scalar l_shoulder_ang = 0, l_elbow_ang = 0;
  Scalar r_shoulder_ang = 0, r_elbow_ang = 0;
  Scalar l_hip_ang = 0, l_knee_ang = 0;
  Scalar r_hip_ang = 0, r_knee_ang = 0;
  Scalar face_scale = 1.0;    // lateral eye/ear spread relative to head_len
};

// Forward kinematics: the 17 joint positions implied by a FigureSpec, all
// marked visible. Pure function of its argument.
codec::KeypointSet skeleton_joints(const FigureSpec& spec);

struct SyntheticSample {
  Index image_id = 0;
  Tensor image;  // (1, 3, h, w), values in [0, 1]
  codec::KeypointSet kps;
  oks::Box box;  // person box with margin, clipped to the image
};

// Draws a figure whose limbs stay inside an h x w image.
FigureSpec sample_figure(Rng& rng, Index img_h, Index img_w);

// Renders the figure over a noise background and assigns visibility flags
// (a small fraction of joints is occluded or dropped). Joints that fall
// outside the image are marked not-labeled.
SyntheticSample render_sample(const FigureSpec& spec, Rng& rng, Index img_h,
                              Index img_w, Index image_id);

// Deterministic under seed: same seed, same bytes.
std::vector<SyntheticSample> make_dataset(Index n, std::uint64_t seed, Index img_h,
                                          Index img_w);

// Left/right channel swaps for mirrored inference: eyes, ears, shoulders,
// elbows, wrists, hips, knees, ankles.
const std::vector<std::pair<Index, Index>>& body_flip_pairs();

// Random rotation (+- rotation_max_deg) and scale ([scale_min, scale_max])
// about the box center; the image is warped by inverse bilinear sampling and
// keypoints follow the same affine map. Joints leaving the image are marked
// not-labeled. Draws exactly two uniforms: angle, then scale.
SyntheticSample augment(const SyntheticSample& sample, Rng& rng,
                        const TrainConfig& cfg);

}  // namespace shufflepose::pipeline
