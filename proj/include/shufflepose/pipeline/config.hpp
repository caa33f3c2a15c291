// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key = value configuration covering the model, the training recipe,
// and evaluation knobs, plus the stepped learning-rate schedule.

#pragma once

#include <string>
#include <vector>

#include "shufflepose/network.hpp"

namespace shufflepose::pipeline {

struct TrainConfig {
  Scalar base_lr = 5e-4;
  Scalar decay_factor = 0.1;
  std::vector<Index> decay_epochs = {90, 120};
  bool decay_epochs_set = false;  // true when a config file pinned them
  Index total_epochs = 140;
  Scalar rotation_max_deg = 40.0;
  Scalar scale_min = 0.7;
  Scalar scale_max = 1.3;
  Index batch_size = 2;
  std::uint64_t seed = 0;
  bool augment = true;
  Index dataset_size = 16;
  Index val_size = 8;
  Scalar sigma = 2.0;  // target Gaussian width in heatmap grid cells

  void validate() const;  // throws ConfigError naming the field
};

struct EvalConfig {
  bool flip = true;                  // average original and mirrored passes
  bool decode_neighborhood = false;  // restrict the second peak to a 3x3 ring
  Scalar oks_scale = 1.0;            // multiplies the tight-box area
  std::string oks_preset = "uniform";  // "uniform" or "coco"
  Scalar oks_uniform_k = 0.1;

  void validate() const;
};

struct Config {
  network::ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
};

// '#' starts a comment; blank lines are skipped; unknown keys and malformed
// values raise ConfigError naming the key. The single key ohkm_k addresses
// both the model's and the loss's top-k.
Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);
std::string config_to_text(const Config& cfg);

// Piecewise-constant schedule: base_lr, multiplied by decay_factor at each
// boundary epoch. With the stock 90/120-of-140 recipe the three plateaus are
// exactly 5e-4, 5e-5, 5e-6 (the factor is applied by repeated
// multiplication, never by powers). When total_epochs is overridden and the
// boundaries are not, they scale proportionally (90/140 and 120/140).
Scalar lr_schedule(Index epoch, const TrainConfig& cfg);

}  // namespace shufflepose::pipeline
