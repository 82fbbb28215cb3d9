// Copyright 2026, scanweave contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "scanweave/dataset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "scanweave/format.hpp"

namespace scanweave {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

float read_le_float(const std::byte *p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | std::to_integer<std::uint32_t>(p[i]);
  return std::bit_cast<float>(bits);
}

}  // namespace

RawScan read_scan_kitti_bin(std::span<const std::byte> bytes) {
  if (bytes.size() % 16 != 0) {
    throw FormatError("kitti bin: byte length " + std::to_string(bytes.size()) + " is not a multiple of 16");
  }
  RawScan scan;
  scan.points.reserve(bytes.size() / 16);
  for (std::size_t off = 0; off < bytes.size(); off += 16) {
    const std::byte *rec = bytes.data() + off;
    scan.points.emplace_back(read_le_float(rec), read_le_float(rec + 4), read_le_float(rec + 8));
  }
  return scan;
}

RawScan read_scan_csv(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("csv: missing header");

  const std::string_view header = trim(lines.front());
  bool has_t = false;
  if (header == "x,y,z,t") {
    has_t = true;
  } else if (header != "x,y,z") {
    throw FormatError("csv: header must be 'x,y,z' or 'x,y,z,t'");
  }

  RawScan scan;
  if (has_t) scan.timestamps.emplace();
  const std::size_t columns = has_t ? 4 : 3;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto cells = split(trim(lines[n]), ',');
    if (cells.size() != columns) {
      throw FormatError("csv line " + std::to_string(n + 1) + ": expected " + std::to_string(columns) +
                        " columns");
    }
    double v[4] = {};
    for (std::size_t c = 0; c < columns; ++c) {
      try {
        v[c] = parse_number(cells[c]);
      } catch (const std::invalid_argument &e) {
        throw FormatError("csv line " + std::to_string(n + 1) + ": " + e.what());
      }
    }
    scan.points.emplace_back(v[0], v[1], v[2]);
    if (has_t) {
      if (!(v[3] >= 0.0 && v[3] <= 1.0)) {
        throw FormatError("csv line " + std::to_string(n + 1) + ": t must lie in [0, 1]");
      }
      scan.timestamps->push_back(v[3]);
    }
  }
  return scan;
}

std::string write_scan_csv(const RawScan &scan) {
  scan.validate();
  std::string out = scan.timestamps ? "x,y,z,t\n" : "x,y,z\n";
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto &p = scan.points[i];
    out += format_number(p.x()) + ',' + format_number(p.y()) + ',' + format_number(p.z());
    if (scan.timestamps) out += ',' + format_number((*scan.timestamps)[i]);
    out += '\n';
  }
  return out;
}

std::string load_text(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_text(const std::filesystem::path &path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

RawScan load_scan(const std::filesystem::path &path) {
  const std::string data = load_text(path);
  if (path.extension() == ".bin") {
    return read_scan_kitti_bin(std::as_bytes(std::span(data.data(), data.size())));
  }
  if (path.extension() == ".csv") return read_scan_csv(data);
  throw FormatError("unsupported scan format: " + path.string());
}

std::string write_trajectory(std::span<const Pose> poses) {
  std::string out;
  for (const auto &p : poses) {
    const auto &r = p.rotation();
    const auto &t = p.translation();
    for (int row = 0; row < 3; ++row) {
      out += format_number(r(row, 0)) + ' ' + format_number(r(row, 1)) + ' ' + format_number(r(row, 2)) + ' ' +
             format_number(t(row));
      out += row < 2 ? ' ' : '\n';
    }
  }
  return out;
}

std::vector<Pose> read_trajectory(std::string_view text) {
  std::vector<Pose> poses;
  std::size_t line_no = 0;
  for (const auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    std::vector<double> v;
    for (const auto tok : split(line, ' ')) {
      if (trim(tok).empty()) continue;
      try {
        v.push_back(parse_number(tok));
      } catch (const std::invalid_argument &e) {
        throw FormatError("trajectory line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (v.size() != 12) throw FormatError("trajectory line " + std::to_string(line_no) + ": expected 12 values");
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 4; ++col) m(row, col) = v[static_cast<std::size_t>(4 * row + col)];
    }
    poses.push_back(Pose::FromMatrix(m));
  }
  return poses;
}

std::vector<Pose> load_trajectory(const std::filesystem::path &path) { return read_trajectory(load_text(path)); }

SequenceSource open_sequence(const std::filesystem::path &dir, double max_range) {
  if (!std::filesystem::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
  SequenceSource seq;
  seq.max_range = max_range;
  bool has_bin = false, has_csv = false;
  for (const auto &entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".bin") has_bin = true;
    if (ext == ".csv") has_csv = true;
    if (ext == ".bin" || ext == ".csv") seq.scans.push_back(entry.path());
  }
  if (has_bin && has_csv) throw FormatError("sequence mixes .bin and .csv scans: " + dir.string());
  if (seq.scans.empty()) throw FormatError("no scans found in " + dir.string());
  std::sort(seq.scans.begin(), seq.scans.end());
  if (std::filesystem::exists(dir / "poses.txt")) seq.ground_truth = load_trajectory(dir / "poses.txt");
  return seq;
}

RawScan synthesize_timestamps(const RawScan &scan) {
  RawScan out = scan;
  out.timestamps.emplace();
  out.timestamps->reserve(scan.points.size());
  for (const auto &p : scan.points) {
    const double s = (std::atan2(p.y(), p.x()) + M_PI) / (2.0 * M_PI);
    out.timestamps->push_back(std::clamp(s, 0.0, 1.0));
  }
  return out;
}

}  // namespace scanweave
