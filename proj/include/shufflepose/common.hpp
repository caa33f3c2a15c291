// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace shufflepose {

using Scalar = double;
using Index = std::int64_t;

// Base error for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor extent / axis mismatch. Messages name the offending axis.
struct ShapeError : Error {
  using Error::Error;
};

// Bad configuration value or unknown key.
struct ConfigError : Error {
  using Error::Error;
};

// Missing / corrupt / malformed external data (checkpoints, annotations).
struct DataError : Error {
  using Error::Error;
};

// NaN or Inf where a finite value is required.
struct NumericError : Error {
  using Error::Error;
};

// Deterministic RNG. mt19937_64 output is pinned by the standard; the
// derived draws below avoid std::*_distribution, whose sequences vary
// between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds, rejection-free modulo bias is irrelevant at these ranges
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // standard normal via the polar method
  double normal() {
    for (;;) {
      double u = uniform(-1.0, 1.0);
      double v = uniform(-1.0, 1.0);
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        return u * std::sqrt(-2.0 * std::log(s) / s);
      }
    }
  }

  // split off an independent stream (used to give each parameter tensor,
  // sample, or worker its own seed)
  std::uint64_t fork() { return gen_(); }

  // Exact engine state as text (the standard pins the format); restore()
  // inverts it. Used by checkpointing.
  std::string state() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void restore(const std::string& s) {
    std::istringstream is(s);
    is >> gen_;
    if (!is) throw DataError("invalid RNG state string");
  }

 private:
  std::mt19937_64 gen_;
};

// FNV-1a 64-bit hash; used for checkpoint checksums and per-name seeds.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t basis = 14695981039346656037ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = basis;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace shufflepose
