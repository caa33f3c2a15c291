// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "shufflepose/tensor.hpp"

namespace shufflepose {

/// Reverse-mode tape over whole-tensor primitives.
///
/// While a Tape is alive (and active on the current thread), every primitive
/// op records one node: the tensors it touched plus an adjoint closure that
/// reads the output's grad buffer and accumulates into the inputs' grad
/// buffers. `backward()` zero-fills the grad of every tensor the tape
/// touched, seeds the loss with 1, and replays the adjoints in reverse
/// recording order, so after it returns every parameter's grad holds
/// d(loss)/d(param) for exactly this loss (no accumulation across calls).
///
/// Tapes nest: constructing a Tape makes it the active one on this thread,
/// destroying it restores the previous. Forward passes without a live Tape
/// skip recording entirely.
class Tape {
 public:
  Tape();
  ~Tape();

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Active tape on this thread, or nullptr when recording is off.
  static Tape* active();

  void record(std::vector<Tensor> tensors, std::function<void()> adjoint);

  void backward(const Tensor& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<Tensor> tensors;  // inputs and outputs, for grad zeroing
    std::function<void()> adjoint;
  };

  std::vector<Node> nodes_;
  Tape* prev_ = nullptr;
};

/// Runs backward on the active tape. Shape error if `loss` is not scalar;
/// plain error if no tape is recording.
void backward(const Tensor& loss);

}  // namespace shufflepose
