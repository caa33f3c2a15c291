// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/tensor.hpp"

#include <sstream>

namespace shufflepose {

std::string to_string(const Dims& d) {
  std::ostringstream os;
  os << "(" << d.n << ", " << d.c << ", " << d.h << ", " << d.w << ")";
  return os.str();
}

}  // namespace shufflepose
