// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end driver routines: training on the synthetic dataset, evaluation
// against held-out figures, raw-heatmap inference dumps, and the ablation
// grid over the shuffle module and attention variants.

#pragma once

#include <string>
#include <vector>

#include "shufflepose/network.hpp"
#include "shufflepose/oks.hpp"
#include "shufflepose/pipeline/annots.hpp"
#include "shufflepose/pipeline/config.hpp"
#include "shufflepose/pipeline/optimizer.hpp"

namespace shufflepose::pipeline {

struct TrainResult {
  std::vector<std::string> loss_lines;  // one per optimizer step, as logged
  Scalar first_total = 0;
  Scalar final_total = 0;
  Index steps = 0;
  std::string checkpoint_path;
};

// Writes every model parameter, and optionally the optimizer moments and the
// data-order RNG state, into one checkpoint file.
void save_training_state(const std::string& path, const network::Model& model,
                         const Adam* adam, const Rng* rng);

// Restores parameters in place; extents must match the constructed model.
// Pass adam/rng to also restore optimizer moments and RNG state.
void load_training_state(const std::string& path, network::Model& model,
                         Adam* adam, Rng* rng);

// Trains on a freshly generated dataset; writes <out_dir>/loss_log.txt and
// <out_dir>/checkpoint.ppck. Deterministic function of the config.
TrainResult train(const Config& cfg, const std::string& out_dir);

struct EvalResult {
  oks::ApSummary summary;
  std::string report;
  std::vector<Record> preds;
};

// Runs the model over the held-out split (generated from a seed offset of
// the training seed), matches predictions to ground truth by object keypoint
// similarity, and writes <out_dir>/report.txt and <out_dir>/preds.txt.
EvalResult evaluate(const Config& cfg, const std::string& checkpoint_path,
                    const std::string& out_dir);

// Dumps refined heatmaps for the held-out split to <out_dir>/heatmaps.ppck
// (entries "heatmaps/<image id>") plus decoded <out_dir>/predictions.txt.
void infer_to_dir(const Config& cfg, const std::string& checkpoint_path,
                  const std::string& out_dir);

// Generates a dataset and writes it as images.ppck (entries "image/<id>") and
// annotations.txt under out_dir; handy for inspecting the synthetic data.
void make_data_to_dir(const Config& cfg, const std::string& out_dir);

// Trains and evaluates the four-way grid {shuffle module off/on} x {plain /
// attention blocks}, then re-runs the first row to demonstrate determinism.
// Returns the report table (also written to <out_dir>/ablation.txt).
std::string run_ablation(const Config& base, const std::string& out_dir);

}  // namespace shufflepose::pipeline
