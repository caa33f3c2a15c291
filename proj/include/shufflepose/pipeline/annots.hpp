// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0
//
// Plain-text interchange for predictions and ground truth. One record per
// line: image id, box (x, y, w, h), score, then for each keypoint a triple
// (x, y, v). Whitespace-separated, full double precision.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "shufflepose/codec.hpp"
#include "shufflepose/oks.hpp"

namespace shufflepose::pipeline {

struct Record {
  Index image_id = 0;
  oks::Box box;
  Scalar score = 0;
  codec::KeypointSet kps;
};

std::string format_record(const Record& rec);
Record parse_record(const std::string& line, Index line_no);

void write_records(std::ostream& os, const std::vector<Record>& recs);
std::vector<Record> read_records(std::istream& is);

void save_records(const std::string& path, const std::vector<Record>& recs);
std::vector<Record> load_records(const std::string& path);

}  // namespace shufflepose::pipeline
