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

/**
 * \file dataset_io.hpp
 * \brief Scan readers and KITTI-style trajectory files.
 *
 * KITTI velodyne `.bin` scans are little-endian float32 quadruples
 * (x, y, z, intensity). CSV scans carry a header `x,y,z` or `x,y,z,t` where
 * `t` is the relative sweep time in [0, 1]. Trajectories are one row-major
 * 3x4 [R|t] matrix per line.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scanweave/preprocess.hpp"

namespace scanweave {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RawScan read_scan_kitti_bin(std::span<const std::byte> bytes);
RawScan read_scan_csv(std::string_view text);
std::string write_scan_csv(const RawScan &scan);

/// Dispatches on the file extension (.bin or .csv).
RawScan load_scan(const std::filesystem::path &path);

std::string write_trajectory(std::span<const Pose> poses);
std::vector<Pose> read_trajectory(std::string_view text);

std::vector<Pose> load_trajectory(const std::filesystem::path &path);
void save_text(const std::filesystem::path &path, std::string_view text);
std::string load_text(const std::filesystem::path &path);

struct SequenceSource {
  std::vector<std::filesystem::path> scans;  // lexicographic order
  std::optional<std::vector<Pose>> ground_truth;
  double max_range = 100.0;
};

/// Lists `.bin`/`.csv` scans in `dir` and picks up `poses.txt` when present.
/// Throws FormatError if the directory is missing, empty, or mixes formats.
SequenceSource open_sequence(const std::filesystem::path &dir, double max_range = 100.0);

/// Replaces timestamps with the azimuth fraction (atan2(y, x) + pi) / 2pi.
RawScan synthesize_timestamps(const RawScan &scan);

}  // namespace scanweave
