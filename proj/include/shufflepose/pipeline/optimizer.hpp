// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Adam with bias correction over a list of named parameter tensors.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shufflepose/network.hpp"
#include "shufflepose/pipeline/checkpoint.hpp"

namespace shufflepose::pipeline {

struct AdamConfig {
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

class Adam {
 public:
  // The tensors are shared handles: updates write through to whoever else
  // holds them (the model).
  explicit Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig cfg = {});

  // One update using each parameter's current grad buffer; parameters whose
  // grad was never allocated are treated as having zero gradient.
  void step(Scalar lr);

  Index steps() const { return t_; }

  // Serializes moments under "adam.m/<name>", "adam.v/<name>" and the step
  // counter under "adam.step".
  void add_to(CheckpointData& data) const;
  void load_from(const CheckpointData& data);  // DataError names missing entries

 private:
  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<Tensor> m_, v_;
  AdamConfig cfg_;
  Index t_ = 0;
};

// All of a model's parameters as (name, shared handle) pairs in registry order.
std::vector<std::pair<std::string, Tensor>> model_params(network::Model& model);

}  // namespace shufflepose::pipeline
