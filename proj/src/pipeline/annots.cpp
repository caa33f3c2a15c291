// Copyright (c) 2026 The Shufflepose Authors
// SPDX-License-Identifier: Apache-2.0

#include "shufflepose/pipeline/annots.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace shufflepose::pipeline {

std::string format_record(const Record& rec) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << rec.image_id << ' ' << rec.box.x << ' ' << rec.box.y << ' '
     << rec.box.w << ' ' << rec.box.h << ' ' << rec.score;
  for (const auto& kp : rec.kps.pts) {
    os << ' ' << kp.x << ' ' << kp.y << ' ' << kp.v;
  }
  return os.str();
}

Record parse_record(const std::string& line, Index line_no) {
  std::istringstream is(line);
  Record rec;
  if (!(is >> rec.image_id >> rec.box.x >> rec.box.y >> rec.box.w >>
        rec.box.h >> rec.score)) {
    throw DataError("record on line " + std::to_string(line_no) +
                    " is missing id/box/score fields");
  }
  codec::Keypoint kp;
  while (is >> kp.x >> kp.y >> kp.v) {
    rec.kps.pts.push_back(kp);
  }
  // Partial trailing triple (or trailing garbage) means the stream failed
  // before eof with fields half-read.
  if (!is.eof()) {
    throw DataError("record on line " + std::to_string(line_no) +
                    " has a malformed keypoint triple");
  }
  if (rec.kps.pts.empty()) {
    throw DataError("record on line " + std::to_string(line_no) +
                    " has no keypoints");
  }
  return rec;
}

void write_records(std::ostream& os, const std::vector<Record>& recs) {
  for (const auto& rec : recs) {
    os << format_record(rec) << '\n';
  }
}

std::vector<Record> read_records(std::istream& is) {
  std::vector<Record> out;
  std::string line;
  Index line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    // Skip blanks and comment lines.
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(parse_record(line, line_no));
  }
  return out;
}

void save_records(const std::string& path, const std::vector<Record>& recs) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  write_records(os, recs);
  if (!os) throw DataError("failed writing records to '" + path + "'");
}

std::vector<Record> load_records(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open records file '" + path + "'");
  return read_records(is);
}

}  // namespace shufflepose::pipeline
