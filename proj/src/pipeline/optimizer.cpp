// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/pipeline/optimizer.hpp"

#include <cmath>

namespace shufflepose::pipeline {

Adam::Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& [name, t] : params_) {
    m_.emplace_back(t.dims());
    v_.emplace_back(t.dims());
  }
}

void Adam::step(Scalar lr) {
  ++t_;
  // Bias corrections come from the stored step count (not a running
  // product), so a resumed run continues exactly where the checkpoint left off.
  const Scalar bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<Scalar>(t_));
  const Scalar bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<Scalar>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i].second;
    auto m = m_[i].array();
    auto v = v_[i].array();
    if (p.has_grad()) {
      auto g = p.grad_array();
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.square();
    } else {
      m = cfg_.beta1 * m;
      v = cfg_.beta2 * v;
    }
    p.array() -= lr * (m / bc1) / ((v / bc2).sqrt() + cfg_.eps);
  }
}

void Adam::add_to(CheckpointData& data) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    data.entries.push_back(tensor_entry("adam.m/" + params_[i].first, m_[i]));
    data.entries.push_back(tensor_entry("adam.v/" + params_[i].first, v_[i]));
  }
  data.entries.push_back(scalar_entry("adam.step", static_cast<Scalar>(t_)));
}

void Adam::load_from(const CheckpointData& data) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Tensor m = entry_tensor(data.at("adam.m/" + params_[i].first));
    const Tensor v = entry_tensor(data.at("adam.v/" + params_[i].first));
    if (m.dims() != m_[i].dims() || v.dims() != v_[i].dims()) {
      throw DataError("checkpoint moments for '" + params_[i].first +
                      "' have mismatched extents");
    }
    m_[i].array() = m.array();
    v_[i].array() = v.array();
  }
  t_ = static_cast<Index>(entry_scalar(data.at("adam.step")));
}

std::vector<std::pair<std::string, Tensor>> model_params(network::Model& model) {
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(model.parameter_names().size());
  for (const std::string& name : model.parameter_names()) {
    out.emplace_back(name, model.parameter(name));
  }
  return out;
}

}  // namespace shufflepose::pipeline
