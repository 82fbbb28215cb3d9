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

#include "scanweave/eval_metrics.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace scanweave {

namespace {

std::vector<double> path_distances(std::span<const Pose> poses) {
  std::vector<double> dist(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    dist[i] = dist[i - 1] + (poses[i].translation() - poses[i - 1].translation()).norm();
  }
  return dist;
}

}  // namespace

RteReport rte(std::span<const Pose> estimate, std::span<const Pose> ground_truth, std::span<const double> lengths,
              std::size_t step) {
  if (estimate.size() != ground_truth.size()) {
    throw std::invalid_argument("rte: estimate has " + std::to_string(estimate.size()) +
                                " poses, ground truth has " + std::to_string(ground_truth.size()));
  }
  if (step == 0) throw std::invalid_argument("rte: step must be positive");

  RteReport report;
  report.per_length.reserve(lengths.size());
  const std::vector<double> dist = path_distances(ground_truth);

  std::vector<LengthError> sums(lengths.size());
  for (std::size_t first = 0; first < ground_truth.size(); first += step) {
    for (std::size_t li = 0; li < lengths.size(); ++li) {
      const double len = lengths[li];
      std::size_t last = first;
      while (last < dist.size() && !(dist[last] > dist[first] + len)) ++last;
      if (last == dist.size()) continue;

      const Pose gt_delta = inverse(ground_truth[first]) * ground_truth[last];
      const Pose est_delta = inverse(estimate[first]) * estimate[last];
      const Pose error = inverse(est_delta) * gt_delta;

      SegmentError seg{first, len, error.translation().norm() / len, se3::rotation_angle(error) / len};
      report.segments.push_back(seg);
      sums[li].length = len;
      sums[li].segments += 1;
      sums[li].translation_pct += seg.translation;
      sums[li].rotation_deg_per_m += seg.rotation;
    }
  }

  for (auto &s : sums) {
    if (s.segments == 0) continue;
    s.translation_pct = 100.0 * s.translation_pct / static_cast<double>(s.segments);
    s.rotation_deg_per_m = (180.0 / M_PI) * s.rotation_deg_per_m / static_cast<double>(s.segments);
    report.per_length.push_back(s);
  }

  report.empty = report.segments.empty();
  if (!report.empty) {
    double t = 0.0, r = 0.0;
    for (const auto &seg : report.segments) {
      t += seg.translation;
      r += seg.rotation;
    }
    const auto n = static_cast<double>(report.segments.size());
    report.translation_pct = 100.0 * t / n;
    report.rotation_deg_per_m = (180.0 / M_PI) * r / n;
  }
  return report;
}

std::string rte_to_json(const RteReport &report, const std::string &sequence) {
  nlohmann::json j;
  j["sequence"] = sequence;
  j["empty"] = report.empty;
  j["segments"] = report.segments.size();
  j["translation_error_pct"] = report.translation_pct;
  j["rotation_error_deg_per_m"] = report.rotation_deg_per_m;
  j["per_length"] = nlohmann::json::array();
  for (const auto &l : report.per_length) {
    j["per_length"].push_back({{"length_m", l.length},
                               {"segments", l.segments},
                               {"translation_error_pct", l.translation_pct},
                               {"rotation_error_deg_per_m", l.rotation_deg_per_m}});
  }
  return j.dump(2) + "\n";
}

std::string rte_table(const RteReport &report, const std::string &sequence) {
  std::string out = "sequence  length_m  segments  t_err_%   r_err_deg/m\n";
  char line[128];
  for (const auto &l : report.per_length) {
    std::snprintf(line, sizeof(line), "%-8s  %8.1f  %8zu  %7.4f  %10.6f\n", sequence.c_str(), l.length,
                  l.segments, l.translation_pct, l.rotation_deg_per_m);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%-8s  %8s  %8zu  %7.4f  %10.6f\n", sequence.c_str(), "avg",
                report.segments.size(), report.translation_pct, report.rotation_deg_per_m);
  out += line;
  return out;
}

}  // namespace scanweave
