// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/pipeline/synth.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace shufflepose::pipeline {
namespace {

struct Vec2 {
  Scalar x = 0, y = 0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator*(Scalar s, Vec2 v) { return {s * v.x, s * v.y}; }

// Limb direction for an absolute angle: 0 points straight down the image
// (+y), positive angles rotate toward +x.
inline Vec2 limb_dir(Scalar a) { return {std::sin(a), std::cos(a)}; }

}  // namespace

codec::KeypointSet skeleton_joints(const FigureSpec& s) {
  // "Up" and "right" axes of the torso frame. With zero lean, up is -y and
  // right is +x; the figure's left side sits on the +right axis (a person
  // facing the camera has their left on the image's right).
  const Vec2 up{std::sin(s.torso_lean), -std::cos(s.torso_lean)};
  const Vec2 right{std::cos(s.torso_lean), std::sin(s.torso_lean)};

  const Vec2 pelvis{s.cx, s.cy};
  const Vec2 neck = pelvis + s.torso_len * up;
  const Vec2 nose = neck + s.head_len * up;

  const Vec2 l_sh = neck + (s.shoulder_w / 2) * right;
  const Vec2 r_sh = neck + (-s.shoulder_w / 2) * right;
  const Vec2 l_hip = pelvis + (s.hip_w / 2) * right;
  const Vec2 r_hip = pelvis + (-s.hip_w / 2) * right;

  const Vec2 l_elb = l_sh + s.upper_arm * limb_dir(s.l_shoulder_ang);
  const Vec2 r_elb = r_sh + s.upper_arm * limb_dir(s.r_shoulder_ang);
  const Vec2 l_wri = l_elb + s.forearm * limb_dir(s.l_elbow_ang);
  const Vec2 r_wri = r_elb + s.forearm * limb_dir(s.r_elbow_ang);

  const Vec2 l_knee = l_hip + s.thigh * limb_dir(s.l_hip_ang);
  const Vec2 r_knee = r_hip + s.thigh * limb_dir(s.r_hip_ang);
  const Vec2 l_ank = l_knee + s.shin * limb_dir(s.l_knee_ang);
  const Vec2 r_ank = r_knee + s.shin * limb_dir(s.r_knee_ang);

  const Vec2 l_eye = nose + (0.25 * s.head_len) * up +
                     (0.3 * s.head_len * s.face_scale) * right;
  const Vec2 r_eye = nose + (0.25 * s.head_len) * up +
                     (-0.3 * s.head_len * s.face_scale) * right;
  const Vec2 l_ear = nose + (0.1 * s.head_len) * up +
                     (0.55 * s.head_len * s.face_scale) * right;
  const Vec2 r_ear = nose + (0.1 * s.head_len) * up +
                     (-0.55 * s.head_len * s.face_scale) * right;

  const Vec2 order[kNumJoints] = {nose,  l_eye, r_eye, l_ear,  r_ear,  l_sh,
                                  r_sh,  l_elb, r_elb, l_wri,  r_wri,  l_hip,
                                  r_hip, l_knee, r_knee, l_ank, r_ank};

  codec::KeypointSet out;
  out.pts.resize(kNumJoints);
  for (Index j = 0; j < kNumJoints; ++j) {
    out.pts[static_cast<std::size_t>(j)] = {order[j].x, order[j].y, 2};
  }
  return out;
}

FigureSpec sample_figure(Rng& rng, Index img_h, Index img_w) {
  const Scalar base = static_cast<Scalar>(std::min(img_h, img_w));
  FigureSpec s;
  s.torso_len = base * rng.uniform(0.18, 0.26);
  s.head_len = s.torso_len * rng.uniform(0.35, 0.5);
  s.shoulder_w = s.torso_len * rng.uniform(0.55, 0.8);
  s.hip_w = s.torso_len * rng.uniform(0.45, 0.65);
  s.upper_arm = s.torso_len * rng.uniform(0.45, 0.6);
  s.forearm = s.torso_len * rng.uniform(0.4, 0.55);
  s.thigh = s.torso_len * rng.uniform(0.55, 0.75);
  s.shin = s.torso_len * rng.uniform(0.5, 0.7);
  s.torso_lean = rng.uniform(-0.25, 0.25);

  // Arms swing around "hanging straight down"; elbows bend relative to the
  // upper arm. The ranges keep every joint inside the frame for the centre
  // jitter chosen below.
  s.l_shoulder_ang = rng.uniform(-0.85, 0.85);
  s.l_elbow_ang = s.l_shoulder_ang + rng.uniform(-0.7, 0.7);
  s.r_shoulder_ang = rng.uniform(-0.85, 0.85);
  s.r_elbow_ang = s.r_shoulder_ang + rng.uniform(-0.7, 0.7);
  s.l_hip_ang = rng.uniform(-0.4, 0.4);
  s.l_knee_ang = s.l_hip_ang + rng.uniform(-0.45, 0.45);
  s.r_hip_ang = rng.uniform(-0.4, 0.4);
  s.r_knee_ang = s.r_hip_ang + rng.uniform(-0.45, 0.45);
  s.face_scale = rng.uniform(0.8, 1.2);

  s.cx = static_cast<Scalar>(img_w) / 2 +
         rng.uniform(-0.05, 0.05) * static_cast<Scalar>(img_w);
  s.cy = static_cast<Scalar>(img_h) * rng.uniform(0.52, 0.6);
  return s;
}

namespace {

// Paints an anti-aliased segment: coverage falls off linearly from 1 inside
// the stroke to 0 half a pixel outside it.
void draw_segment(Tensor& img, Vec2 a, Vec2 b, const Scalar tint[3],
                  Scalar radius) {
  const Index h = img.dims().h, w = img.dims().w;
  const Scalar pad = radius + 1.5;
  const Index x0 = std::max<Index>(0, static_cast<Index>(std::floor(std::min(a.x, b.x) - pad)));
  const Index x1 = std::min<Index>(w - 1, static_cast<Index>(std::ceil(std::max(a.x, b.x) + pad)));
  const Index y0 = std::max<Index>(0, static_cast<Index>(std::floor(std::min(a.y, b.y) - pad)));
  const Index y1 = std::min<Index>(h - 1, static_cast<Index>(std::ceil(std::max(a.y, b.y) + pad)));

  const Scalar dx = b.x - a.x, dy = b.y - a.y;
  const Scalar len2 = dx * dx + dy * dy;
  for (Index y = y0; y <= y1; ++y) {
    for (Index x = x0; x <= x1; ++x) {
      const Scalar px = static_cast<Scalar>(x), py = static_cast<Scalar>(y);
      Scalar t = 0;
      if (len2 > 0) {
        t = ((px - a.x) * dx + (py - a.y) * dy) / len2;
        t = std::clamp<Scalar>(t, 0, 1);
      }
      const Scalar qx = a.x + t * dx - px, qy = a.y + t * dy - py;
      const Scalar d = std::sqrt(qx * qx + qy * qy);
      const Scalar cov = std::clamp<Scalar>(radius + 0.5 - d, 0, 1);
      if (cov <= 0) continue;
      for (Index c = 0; c < 3; ++c) {
        Scalar& px_ref = img.at(0, c, y, x);
        px_ref = px_ref * (1 - cov) + tint[c] * cov;
      }
    }
  }
}

// Paints an anti-aliased circle outline (the head).
void draw_ring(Tensor& img, Vec2 centre, Scalar ring_r, const Scalar tint[3]) {
  const Index h = img.dims().h, w = img.dims().w;
  const Scalar pad = ring_r + 2.0;
  const Index x0 = std::max<Index>(0, static_cast<Index>(std::floor(centre.x - pad)));
  const Index x1 = std::min<Index>(w - 1, static_cast<Index>(std::ceil(centre.x + pad)));
  const Index y0 = std::max<Index>(0, static_cast<Index>(std::floor(centre.y - pad)));
  const Index y1 = std::min<Index>(h - 1, static_cast<Index>(std::ceil(centre.y + pad)));
  for (Index y = y0; y <= y1; ++y) {
    for (Index x = x0; x <= x1; ++x) {
      const Scalar dx = static_cast<Scalar>(x) - centre.x;
      const Scalar dy = static_cast<Scalar>(y) - centre.y;
      const Scalar d = std::abs(std::sqrt(dx * dx + dy * dy) - ring_r);
      const Scalar cov = std::clamp<Scalar>(1.5 - d, 0, 1);
      if (cov <= 0) continue;
      for (Index c = 0; c < 3; ++c) {
        Scalar& px_ref = img.at(0, c, y, x);
        px_ref = px_ref * (1 - cov) + tint[c] * cov;
      }
    }
  }
}

}  // namespace

SyntheticSample render_sample(const FigureSpec& spec, Rng& rng, Index img_h,
                              Index img_w, Index image_id) {
  SyntheticSample out;
  out.image_id = image_id;
  out.image = Tensor(1, 3, img_h, img_w);
  out.kps = skeleton_joints(spec);

  auto& img = out.image;
  for (Index i = 0; i < img.dims().numel(); ++i) {
    img.data()[i] = rng.uniform(0.0, 0.15);
  }

  // Person box: joint extent plus a 10% margin per side, clipped to the image.
  Scalar min_x = out.kps.pts[0].x, max_x = min_x;
  Scalar min_y = out.kps.pts[0].y, max_y = min_y;
  for (const auto& kp : out.kps.pts) {
    min_x = std::min(min_x, kp.x);
    max_x = std::max(max_x, kp.x);
    min_y = std::min(min_y, kp.y);
    max_y = std::max(max_y, kp.y);
  }
  const Scalar mx = 0.1 * (max_x - min_x), my = 0.1 * (max_y - min_y);
  const Scalar bx0 = std::max<Scalar>(0, min_x - mx);
  const Scalar by0 = std::max<Scalar>(0, min_y - my);
  const Scalar bx1 = std::min<Scalar>(static_cast<Scalar>(img_w), max_x + mx);
  const Scalar by1 = std::min<Scalar>(static_cast<Scalar>(img_h), max_y + my);
  out.box = {bx0, by0, std::max<Scalar>(1, bx1 - bx0), std::max<Scalar>(1, by1 - by0)};

  const auto& p = out.kps.pts;
  auto v2 = [&](std::size_t j) { return Vec2{p[j].x, p[j].y}; };
  const Vec2 neck = 0.5 * (v2(5) + v2(6));
  const Vec2 pelvis = 0.5 * (v2(11) + v2(12));

  const std::pair<std::size_t, std::size_t> bones[] = {
      {5, 7},  {7, 9},  {6, 8},  {8, 10}, {11, 13}, {13, 15},
      {12, 14}, {14, 16}, {5, 6}, {11, 12}, {5, 11}, {6, 12}};

  auto draw_tint = [&](Scalar t[3]) {
    for (int c = 0; c < 3; ++c) t[c] = rng.uniform(0.5, 1.0);
  };

  Scalar tint[3];
  draw_tint(tint);
  draw_segment(img, pelvis, neck, tint, 1.2);
  for (const auto& [a, b] : bones) {
    draw_tint(tint);
    draw_segment(img, v2(a), v2(b), tint, 1.0);
  }
  draw_tint(tint);
  draw_ring(img, v2(0), 0.45 * spec.head_len, tint);
  // Small face dots so eyes and ears leave image evidence.
  for (std::size_t j : {std::size_t{0}, std::size_t{1}, std::size_t{2},
                        std::size_t{3}, std::size_t{4}}) {
    draw_tint(tint);
    draw_segment(img, v2(j), v2(j), tint, 1.0);
  }

  for (Index i = 0; i < img.dims().numel(); ++i) {
    img.data()[i] = std::clamp<Scalar>(img.data()[i], 0, 1);
  }

  // Visibility: a small fraction of joints is dropped entirely or marked
  // occluded; anything off the canvas is not labeled.
  for (auto& kp : out.kps.pts) {
    const Scalar u = rng.uniform();
    if (u < 0.05) {
      kp.v = 0;
    } else if (u < 0.15) {
      kp.v = 1;
    }
    if (kp.x < 0 || kp.x > static_cast<Scalar>(img_w - 1) || kp.y < 0 ||
        kp.y > static_cast<Scalar>(img_h - 1)) {
      kp.v = 0;
    }
  }
  return out;
}

std::vector<SyntheticSample> make_dataset(Index n, std::uint64_t seed, Index img_h,
                                          Index img_w) {
  Rng rng(seed);
  std::vector<SyntheticSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const FigureSpec spec = sample_figure(rng, img_h, img_w);
    out.push_back(render_sample(spec, rng, img_h, img_w, i));
  }
  return out;
}

const std::vector<std::pair<Index, Index>>& body_flip_pairs() {
  static const std::vector<std::pair<Index, Index>> pairs = {
      {1, 2}, {3, 4}, {5, 6}, {7, 8}, {9, 10}, {11, 12}, {13, 14}, {15, 16}};
  return pairs;
}

SyntheticSample augment(const SyntheticSample& sample, Rng& rng,
                        const TrainConfig& cfg) {
  const Scalar theta_deg = rng.uniform(-cfg.rotation_max_deg, cfg.rotation_max_deg);
  const Scalar scale = rng.uniform(cfg.scale_min, cfg.scale_max);

  SyntheticSample out;
  out.image_id = sample.image_id;

  if (theta_deg == 0 && scale == 1) {
    // The transform is the identity; copy instead of resampling so the
    // untouched path is bit-exact.
    out.image = sample.image.clone();
    out.kps = sample.kps;
    out.box = sample.box;
    return out;
  }

  const Scalar theta = theta_deg * (std::acos(Scalar(-1)) / 180.0);
  const Scalar ca = std::cos(theta), sa = std::sin(theta);
  // Forward map about the box centre: p' = s * R(theta) * (p - c) + c.
  const Scalar a00 = scale * ca, a01 = -scale * sa;
  const Scalar a10 = scale * sa, a11 = scale * ca;
  // Inverse: p = (1/s) * R(-theta) * (p' - c) + c.
  const Scalar i00 = ca / scale, i01 = sa / scale;
  const Scalar i10 = -sa / scale, i11 = ca / scale;
  const Scalar cx = sample.box.x + sample.box.w / 2;
  const Scalar cy = sample.box.y + sample.box.h / 2;

  const Index h = sample.image.dims().h, w = sample.image.dims().w;
  out.image = Tensor(1, 3, h, w);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      const Scalar rx = static_cast<Scalar>(x) - cx;
      const Scalar ry = static_cast<Scalar>(y) - cy;
      const Scalar sx = i00 * rx + i01 * ry + cx;
      const Scalar sy = i10 * rx + i11 * ry + cy;
      const Scalar fx0 = std::floor(sx), fy0 = std::floor(sy);
      const Index x0 = static_cast<Index>(fx0), y0 = static_cast<Index>(fy0);
      const Scalar fx = sx - fx0, fy = sy - fy0;
      for (Index c = 0; c < 3; ++c) {
        auto tap = [&](Index yy, Index xx) -> Scalar {
          if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0;
          return sample.image.at(0, c, yy, xx);
        };
        const Scalar top = tap(y0, x0) * (1 - fx) + tap(y0, x0 + 1) * fx;
        const Scalar bot = tap(y0 + 1, x0) * (1 - fx) + tap(y0 + 1, x0 + 1) * fx;
        out.image.at(0, c, y, x) = top * (1 - fy) + bot * fy;
      }
    }
  }

  out.kps = sample.kps;
  for (auto& kp : out.kps.pts) {
    const Scalar rx = kp.x - cx, ry = kp.y - cy;
    kp.x = a00 * rx + a01 * ry + cx;
    kp.y = a10 * rx + a11 * ry + cy;
    if (kp.x < 0 || kp.x > static_cast<Scalar>(w - 1) || kp.y < 0 ||
        kp.y > static_cast<Scalar>(h - 1)) {
      kp.v = 0;
    }
  }

  const Scalar corners[4][2] = {
      {sample.box.x, sample.box.y},
      {sample.box.x + sample.box.w, sample.box.y},
      {sample.box.x, sample.box.y + sample.box.h},
      {sample.box.x + sample.box.w, sample.box.y + sample.box.h}};
  Scalar nx0 = 0, ny0 = 0, nx1 = 0, ny1 = 0;
  for (int i = 0; i < 4; ++i) {
    const Scalar rx = corners[i][0] - cx, ry = corners[i][1] - cy;
    const Scalar px = a00 * rx + a01 * ry + cx;
    const Scalar py = a10 * rx + a11 * ry + cy;
    if (i == 0) {
      nx0 = nx1 = px;
      ny0 = ny1 = py;
    } else {
      nx0 = std::min(nx0, px);
      nx1 = std::max(nx1, px);
      ny0 = std::min(ny0, py);
      ny1 = std::max(ny1, py);
    }
  }
  nx0 = std::max<Scalar>(0, nx0);
  ny0 = std::max<Scalar>(0, ny0);
  nx1 = std::min<Scalar>(static_cast<Scalar>(w), nx1);
  ny1 = std::min<Scalar>(static_cast<Scalar>(h), ny1);
  out.box = {nx0, ny0, std::max<Scalar>(1, nx1 - nx0), std::max<Scalar>(1, ny1 - ny0)};
  return out;
}

}  // namespace shufflepose::pipeline
