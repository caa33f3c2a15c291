// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint container: magic "PPCK", version, named f64 entries with
// explicit rank/extents, and a trailing FNV-1a checksum over every preceding
// byte. Writes are canonical, so save -> load -> save is byte-identical.

#pragma once

#include <string>
#include <vector>

#include "shufflepose/tensor.hpp"

namespace shufflepose::pipeline {

struct CheckpointEntry {
  std::string name;
  std::vector<Index> extents;  // rank = extents.size(), each fits in u32
  std::vector<Scalar> values;  // length = product of extents
};

struct CheckpointData {
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const;
  // find() or DataError naming the missing entry.
  const CheckpointEntry& at(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const CheckpointData& data);

// Throws DataError on unreadable files, bad magic/version, truncation, or
// checksum mismatch.
CheckpointData load_checkpoint(const std::string& path);

// Rank-4 tensor <-> entry.
CheckpointEntry tensor_entry(const std::string& name, const Tensor& t);
Tensor entry_tensor(const CheckpointEntry& e);

// Text payload <-> rank-1 entry (one byte per element). Used for RNG state.
CheckpointEntry string_entry(const std::string& name, const std::string& payload);
std::string entry_string(const CheckpointEntry& e);

// Scalar <-> rank-1 single-element entry. Used for step counters.
CheckpointEntry scalar_entry(const std::string& name, Scalar v);
Scalar entry_scalar(const CheckpointEntry& e);

}  // namespace shufflepose::pipeline
