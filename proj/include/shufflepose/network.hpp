// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end model assembly: a small residual backbone feeding a 4-level
// pyramid, a coarse top-down stage with per-level heatmap heads, and a
// refinement stage that fuses all levels through attention-gated bottleneck
// blocks. Also the masked L2 / hard-keypoint-mining losses.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shufflepose/attention.hpp"
#include "shufflepose/csm.hpp"
#include "shufflepose/layers.hpp"

namespace shufflepose::network {

struct ModelConfig {
  Index base_channels = 16;  // pyramid width D
  Index blocks_per_stage = 1;
  Index num_keypoints = 17;
  Index groups = 4;  // channel shuffle groups
  attention::Variant variant = attention::Variant::kScarb;
  Index ohkm_k = 8;
  Index input_h = 128;
  Index input_w = 96;
  bool use_csm = true;
  bool csm_reduce = true;  // 1x1 reduction back to D after the shuffle module

  // Throws ConfigError naming the offending field. Input extents must be
  // multiples of 32 in a 4:3 height:width ratio so every pyramid level has
  // integral extents.
  void validate() const;
};

// Per-sample, per-keypoint visibility flags: 0 excluded from losses,
// 1 and 2 included.
using Visibility = std::vector<std::vector<int>>;

struct LossReport {
  std::array<Scalar, 4> global_l2{};  // coarse-stage loss per pyramid level
  Scalar refine_ohkm = 0.0;
  Scalar total = 0.0;              // mean of global losses + refine loss
  Index skipped_samples = 0;       // samples with zero visible keypoints
};

// Shared loss primitive: per sample, mean squared error per visible keypoint
// channel, sorted descending; the largest min(k, #visible) values are
// averaged (summing in descending order), samples are averaged over the
// batch. Samples with no visible keypoints contribute zero and are counted
// in *skipped. Differentiable in pred and target.
Tensor keypoint_mse_loss(const Tensor& pred, const Tensor& target,
                         const Visibility& vis, Index k,
                         Index* skipped = nullptr);

// keypoint_mse_loss with k = num keypoints: plain masked L2.
Tensor l2_loss(const Tensor& pred, const Tensor& target, const Visibility& vis,
               Index* skipped = nullptr);

// keypoint_mse_loss with caller-chosen k (hard-keypoint mining).
Tensor ohkm_loss(const Tensor& pred, const Tensor& target, const Visibility& vis,
                 Index k, Index* skipped = nullptr);

class Model {
 public:
  Model(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }

  // Named parameter registry in stable registration order. Parameter tensors
  // are shared handles: mutating them through the registry mutates the model.
  const std::vector<std::string>& parameter_names() const { return names_; }
  Tensor& parameter(const std::string& name);
  const Tensor& parameter(const std::string& name) const;
  Index parameter_count() const;  // total scalar count
  void zero_grads();

  // Backbone: strides 4/8/16/32 at widths D/2D/4D/8D, each stage projected
  // to width D by a 1x1 convolution.
  csm::PyramidFeatures backbone(const Tensor& image) const;

  // Shuffle-module enhancement (doubling width to 2D) followed by the
  // optional per-level 1x1 reduction back to D. Identity when disabled.
  csm::PyramidFeatures enhance(const csm::PyramidFeatures& p) const;

  struct GlobalOut {
    std::array<Tensor, 4> heatmaps;  // per level, upsampled to input/4
    std::array<Tensor, 4> features;  // merged top-down features per level
  };
  GlobalOut globalnet(const csm::PyramidFeatures& p) const;

  // Per-level bottleneck stacks (level l gets l-2 blocks), upsample to
  // input/4, concatenate, one final block, prediction head.
  Tensor refinenet(const std::array<Tensor, 4>& features) const;

  struct ForwardOut {
    std::array<Tensor, 4> global_heatmaps;
    Tensor refine_heatmap;
  };
  ForwardOut forward(const Tensor& image) const;

  // Final refined heatmaps only.
  Tensor infer(const Tensor& image) const;

  struct LossOut {
    LossReport report;
    Tensor total;  // recorded scalar; backward() populates parameter grads
  };
  LossOut forward_loss(const Tensor& images, const Tensor& targets,
                       const Visibility& vis) const;

  // Channel width of the pyramid entering the top-down stage.
  Index fpn_width() const;

 private:
  struct BackboneStage {
    layers::ConvParams trans;  // 3x3 stride-2 transition
    std::vector<layers::BottleneckParams> blocks;
    layers::ConvParams out;  // 1x1 projection to width D
  };

  Tensor& register_param(const std::string& name, const Tensor& t);
  void reg_conv(const std::string& prefix, layers::ConvParams& p);
  void reg_fc(const std::string& prefix, layers::FcParams& p);
  void reg_bottleneck(const std::string& prefix, layers::BottleneckParams& p);
  void reg_block(const std::string& prefix, attention::BlockParams& p);
  void init_parameters(std::uint64_t seed);

  ModelConfig cfg_;
  layers::ConvParams stem_;
  std::array<BackboneStage, 4> stages_;
  csm::CsmParams csm_;
  std::array<layers::ConvParams, 4> csm_out_;
  std::array<layers::HeadParams, 4> global_heads_;
  std::array<std::vector<attention::BlockParams>, 4> refine_blocks_;
  attention::BlockParams refine_final_;
  layers::HeadParams refine_head_;

  std::vector<std::string> names_;
  std::map<std::string, Tensor> params_;
};

}  // namespace shufflepose::network
