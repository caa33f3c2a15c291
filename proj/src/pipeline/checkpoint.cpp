// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/pipeline/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>

namespace shufflepose::pipeline {

namespace {

constexpr char kMagic[4] = {'P', 'P', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

// All integers and doubles are serialized little-endian regardless of host.
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

  std::uint16_t u16() { return static_cast<std::uint16_t>(raw(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
  std::uint64_t u64() { return raw(8); }
  double f64() { return std::bit_cast<double>(raw(8)); }
  std::uint8_t u8() { return static_cast<std::uint8_t>(raw(1)); }

  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::uint64_t raw(std::size_t n) {
    need(n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }

  void need(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw DataError("checkpoint '" + path_ + "' is truncated at byte " +
                      std::to_string(pos_));
    }
  }

  const std::string& buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

const CheckpointEntry* CheckpointData::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const CheckpointEntry& CheckpointData::at(const std::string& name) const {
  const CheckpointEntry* e = find(name);
  if (!e) throw DataError("checkpoint is missing entry '" + name + "'");
  return *e;
}

void save_checkpoint(const std::string& path, const CheckpointData& data) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(data.entries.size()));
  for (const CheckpointEntry& e : data.entries) {
    if (e.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw DataError("checkpoint entry name too long: '" + e.name + "'");
    }
    Index numel = 1;
    for (Index ext : e.extents) {
      if (ext < 0 || ext > std::numeric_limits<std::uint32_t>::max()) {
        throw DataError("checkpoint entry '" + e.name + "' has an extent outside u32 range");
      }
      numel *= ext;
    }
    if (numel != static_cast<Index>(e.values.size())) {
      throw DataError("checkpoint entry '" + e.name + "': extents imply " +
                      std::to_string(numel) + " values, got " +
                      std::to_string(e.values.size()));
    }
    put_u16(out, static_cast<std::uint16_t>(e.name.size()));
    out.append(e.name);
    out.push_back(static_cast<char>(e.extents.size()));
    for (Index ext : e.extents) put_u32(out, static_cast<std::uint32_t>(ext));
    for (Scalar v : e.values) put_f64(out, v);
  }
  put_u64(out, fnv1a(out.data(), out.size()));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open checkpoint '" + path + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing checkpoint '" + path + "'");
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint '" + path + "'");
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (buf.size() < 4 + 4 + 4 + 8) {
    throw DataError("checkpoint '" + path + "' is too small to be valid");
  }
  const std::size_t body = buf.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[body + i])) << (8 * i);
  }
  if (fnv1a(buf.data(), body) != stored) {
    throw DataError("checkpoint '" + path + "' failed its checksum (corrupt file)");
  }

  Reader r(buf, path);
  if (r.bytes(4) != std::string(kMagic, 4)) {
    throw DataError("checkpoint '" + path + "' has a bad magic header");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError("checkpoint '" + path + "' has unsupported version " +
                    std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  CheckpointData data;
  data.entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const std::uint16_t name_len = r.u16();
    e.name = r.bytes(name_len);
    const std::uint8_t rank = r.u8();
    Index numel = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      e.extents.push_back(static_cast<Index>(r.u32()));
      numel *= e.extents.back();
      if (numel < 0 || numel > static_cast<Index>(1) << 40) {
        throw DataError("checkpoint '" + path + "' entry '" + e.name +
                        "' declares an implausible element count");
      }
    }
    if (r.pos() + static_cast<std::size_t>(numel) * 8 > body) {
      throw DataError("checkpoint '" + path + "' entry '" + e.name +
                      "' runs past the end of the file");
    }
    e.values.reserve(static_cast<std::size_t>(numel));
    for (Index v = 0; v < numel; ++v) e.values.push_back(r.f64());
    data.entries.push_back(std::move(e));
  }
  if (r.pos() != body) {
    throw DataError("checkpoint '" + path + "' has trailing bytes after the last entry");
  }
  return data;
}

CheckpointEntry tensor_entry(const std::string& name, const Tensor& t) {
  CheckpointEntry e;
  e.name = name;
  const Dims& d = t.dims();
  e.extents = {d.n, d.c, d.h, d.w};
  e.values.assign(t.data(), t.data() + t.numel());
  return e;
}

Tensor entry_tensor(const CheckpointEntry& e) {
  if (e.extents.size() != 4) {
    throw DataError("checkpoint entry '" + e.name + "' has rank " +
                    std::to_string(e.extents.size()) + ", expected 4");
  }
  Tensor t(e.extents[0], e.extents[1], e.extents[2], e.extents[3]);
  std::copy(e.values.begin(), e.values.end(), t.data());
  return t;
}

CheckpointEntry string_entry(const std::string& name, const std::string& payload) {
  CheckpointEntry e;
  e.name = name;
  e.extents = {static_cast<Index>(payload.size())};
  e.values.reserve(payload.size());
  for (unsigned char c : payload) e.values.push_back(static_cast<Scalar>(c));
  return e;
}

std::string entry_string(const CheckpointEntry& e) {
  std::string s;
  s.reserve(e.values.size());
  for (Scalar v : e.values) {
    if (v < 0.0 || v > 255.0 || v != static_cast<Scalar>(static_cast<unsigned char>(v))) {
      throw DataError("checkpoint entry '" + e.name + "' is not a byte string");
    }
    s.push_back(static_cast<char>(static_cast<unsigned char>(v)));
  }
  return s;
}

CheckpointEntry scalar_entry(const std::string& name, Scalar v) {
  CheckpointEntry e;
  e.name = name;
  e.extents = {1};
  e.values = {v};
  return e;
}

Scalar entry_scalar(const CheckpointEntry& e) {
  if (e.values.size() != 1) {
    throw DataError("checkpoint entry '" + e.name + "' is not a scalar");
  }
  return e.values[0];
}

}  // namespace shufflepose::pipeline
