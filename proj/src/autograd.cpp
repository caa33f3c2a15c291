// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/autograd.hpp"

#include <unordered_set>

namespace shufflepose {

namespace {
thread_local Tape* g_active = nullptr;
}

Tape::Tape() : prev_(g_active) { g_active = this; }

Tape::~Tape() { g_active = prev_; }

Tape* Tape::active() { return g_active; }

void Tape::record(std::vector<Tensor> tensors, std::function<void()> adjoint) {
  nodes_.push_back(Node{std::move(tensors), std::move(adjoint)});
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward requires a scalar loss, got " +
                     (loss.defined() ? to_string(loss.dims()) : std::string("undefined")));
  }

  std::unordered_set<const void*> seen;
  for (Node& node : nodes_) {
    for (Tensor& t : node.tensors) {
      if (seen.insert(t.id()).second) t.zero_grad();
    }
  }

  Tensor seed = loss;
  seed.grad()[0] = 1.0;

  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    it->adjoint();
  }
}

void backward(const Tensor& loss) {
  Tape* tape = Tape::active();
  if (tape == nullptr) {
    throw Error("backward called with no active tape");
  }
  tape->backward(loss);
}

}  // namespace shufflepose
