// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Central finite-difference verification of analytic gradients, plus a named
// suite covering every differentiable operation up to the full training loss.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shufflepose/autograd.hpp"
#include "shufflepose/tensor.hpp"

namespace shufflepose::gradcheck {

struct CheckResult {
  std::string name;
  Scalar max_rel_err = 0.0;
  Index coords_checked = 0;
  bool pass = false;
};

struct CheckOptions {
  Scalar step = 1e-5;        // central difference half-step
  Scalar rel_tol = 1e-5;     // relative error bound
  Scalar abs_floor = 1e-8;   // |analytic - numeric| below this always passes
  Index max_coords = 0;      // 0 = exhaustive; else spot-check this many
                             // coordinates per tensor, chosen deterministically
  std::uint64_t coord_seed = 0;
};

// forward() must rebuild the scalar loss from scratch on every call (it runs
// 1 + 2*#coords times). wrt lists the leaf tensors to differentiate. Returns
// the worst relative error over all checked coordinates; *coords reports how
// many were checked.
Scalar max_relative_error(const std::function<Tensor()>& forward,
                          const std::vector<Tensor>& wrt,
                          const CheckOptions& opts = {},
                          Index* coords = nullptr);

// Convenience wrapper producing a named pass/fail record.
CheckResult check(const std::string& name, const std::function<Tensor()>& forward,
                  const std::vector<Tensor>& wrt, const CheckOptions& opts = {});

// The full named suite: every tensor-core primitive, attention stages, both
// attention bottleneck orderings, the shuffle fusion module end-to-end, and
// the complete training loss on a 128x96 input at base width 16 (the last
// spot-checked over sampled coordinates).
std::vector<CheckResult> run_suite(std::uint64_t seed);

}  // namespace shufflepose::gradcheck
