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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "test_util.hpp"

using namespace scanweave;

namespace {

struct NaiveReport {
  std::vector<double> per_length_pct;  // NaN when a length has no segment
  double overall_pct = 0.0;
  std::size_t segments = 0;
};

// Segment evaluation with 4x4 matrices and distances re-summed per segment.
NaiveReport naive_rte(const std::vector<Pose> &est, const std::vector<Pose> &gt, const std::vector<double> &lengths) {
  NaiveReport rep;
  double total = 0.0;
  for (double len : lengths) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t first = 0; first < gt.size(); ++first) {
      double travelled = 0.0;
      std::size_t last = first;
      bool found = false;
      for (std::size_t j = first + 1; j < gt.size(); ++j) {
        travelled += (gt[j].matrix().block<3, 1>(0, 3) - gt[j - 1].matrix().block<3, 1>(0, 3)).norm();
        if (travelled > len) {
          last = j;
          found = true;
          break;
        }
      }
      if (!found) continue;
      const Eigen::Matrix4d dg = gt[first].matrix().inverse() * gt[last].matrix();
      const Eigen::Matrix4d de = est[first].matrix().inverse() * est[last].matrix();
      const Eigen::Matrix4d err = de.inverse() * dg;
      sum += err.block<3, 1>(0, 3).norm() / len;
      ++count;
    }
    rep.per_length_pct.push_back(count ? 100.0 * sum / count : std::nan(""));
    total += sum;
    rep.segments += count;
  }
  rep.overall_pct = rep.segments ? 100.0 * total / rep.segments : 0.0;
  return rep;
}

std::vector<Pose> wiggly_path(std::mt19937_64 &rng, std::size_t n) {
  std::vector<Pose> poses{Pose::Identity()};
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 1; i < n; ++i) {
    poses.push_back(poses.back() * se3::exp({{1.0 + 0.1 * g(rng), 0.05 * g(rng), 0.02 * g(rng)},
                                             {0.002 * g(rng), 0.002 * g(rng), 0.03 * g(rng)}}));
  }
  return poses;
}

std::vector<Pose> perturbed(const std::vector<Pose> &poses, std::mt19937_64 &rng) {
  std::vector<Pose> out{poses[0]};
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const Pose step = inverse(poses[i - 1]) * poses[i];
    out.push_back(out.back() * step *
                  se3::exp({{0.01 * g(rng), 0.01 * g(rng), 0.005 * g(rng)}, {1e-4 * g(rng), 1e-4 * g(rng), 1e-3 * g(rng)}}));
  }
  return out;
}

}  // namespace

TEST(Rte, SelfIsZero) {
  std::mt19937_64 rng(71);
  const auto gt = wiggly_path(rng, 150);
  const RteReport r = rte(gt, gt, kDeskLengths);
  EXPECT_FALSE(r.empty);
  EXPECT_LT(r.translation_pct, 1e-12);
  EXPECT_LT(r.rotation_deg_per_m, 1e-12);
  for (const auto &l : r.per_length) EXPECT_LT(l.translation_pct, 1e-12);
}

TEST(Rte, UniformScaleOnStraightLine) {
  // 0.3 m spacing; a segment of nominal length L spans the first multiple of
  // 0.3 m beyond L, so a 1% scale error gives 1% * span / L.
  const double s = 0.3;
  std::vector<Pose> gt, est;
  for (int i = 0; i <= 500; ++i) {
    gt.push_back(Pose::FromTranslation({s * i, 0, 0}));
    est.push_back(Pose::FromTranslation({1.01 * s * i, 0, 0}));
  }
  const std::vector<double> lengths{10, 20, 40};
  const RteReport r = rte(est, gt, lengths);
  ASSERT_EQ(r.per_length.size(), 3u);
  for (const auto &l : r.per_length) {
    const double span = s * (std::floor(l.length / s) + 1.0);
    EXPECT_NEAR(l.translation_pct, 1.0 * span / l.length, 1e-9) << l.length;
    EXPECT_NEAR(l.rotation_deg_per_m, 0.0, 1e-12);
  }
}

TEST(Rte, MatchesNaiveOracle) {
  std::mt19937_64 rng(72);
  for (int trial = 0; trial < 3; ++trial) {
    const auto gt = wiggly_path(rng, 200);
    const auto est = perturbed(gt, rng);
    const RteReport r = rte(est, gt, kDeskLengths);
    const NaiveReport n = naive_rte(est, gt, kDeskLengths);
    EXPECT_EQ(r.segments.size(), n.segments);
    EXPECT_NEAR(r.translation_pct, n.overall_pct, 1e-9);
    std::size_t k = 0;
    for (std::size_t li = 0; li < kDeskLengths.size(); ++li) {
      if (std::isnan(n.per_length_pct[li])) continue;
      ASSERT_LT(k, r.per_length.size());
      EXPECT_EQ(r.per_length[k].length, kDeskLengths[li]);
      EXPECT_NEAR(r.per_length[k].translation_pct, n.per_length_pct[li], 1e-9);
      ++k;
    }
    EXPECT_EQ(k, r.per_length.size());
  }
}

TEST(Rte, OverallIsMeanOverSegments) {
  std::mt19937_64 rng(73);
  const auto gt = wiggly_path(rng, 120);
  const RteReport r = rte(perturbed(gt, rng), gt, kDeskLengths);
  double sum = 0.0;
  for (const auto &s : r.segments) sum += s.translation;
  EXPECT_NEAR(r.translation_pct, 100.0 * sum / r.segments.size(), 1e-12);
}

TEST(Rte, RigidTransformInvariance) {
  std::mt19937_64 rng(74);
  const auto gt = wiggly_path(rng, 150);
  const auto est = perturbed(gt, rng);
  const Pose g = scanweave::testing::random_pose(rng, 100.0, 3.0);
  std::vector<Pose> gt2, est2;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt2.push_back(g * gt[i]);
    est2.push_back(g * est[i]);
  }
  EXPECT_NEAR(rte(est2, gt2, kDeskLengths).translation_pct, rte(est, gt, kDeskLengths).translation_pct, 1e-9);
}

TEST(Rte, StepAndErrors) {
  std::mt19937_64 rng(75);
  const auto gt = wiggly_path(rng, 100);
  const auto est = perturbed(gt, rng);
  const RteReport every = rte(est, gt, kDeskLengths, 1);
  const RteReport tenth = rte(est, gt, kDeskLengths, 10);
  EXPECT_LT(tenth.segments.size(), every.segments.size());
  for (const auto &s : tenth.segments) EXPECT_EQ(s.first_frame % 10, 0u);

  EXPECT_THROW(rte(est, std::vector<Pose>(gt.begin(), gt.end() - 1), kDeskLengths), std::invalid_argument);
  EXPECT_THROW(rte(est, gt, kDeskLengths, 0), std::invalid_argument);
  const RteReport short_run = rte(est, gt, kKittiLengths);
  EXPECT_TRUE(short_run.empty);
  EXPECT_TRUE(short_run.per_length.empty());
}

TEST(Rte, JsonAndTable) {
  std::mt19937_64 rng(76);
  const auto gt = wiggly_path(rng, 60);
  const RteReport r = rte(perturbed(gt, rng), gt, kDeskLengths);
  const auto j = nlohmann::json::parse(rte_to_json(r, "synthetic"));
  EXPECT_EQ(j["sequence"], "synthetic");
  EXPECT_EQ(j["segments"].get<std::size_t>(), r.segments.size());
  EXPECT_NEAR(j["translation_error_pct"].get<double>(), r.translation_pct, 1e-12);
  EXPECT_EQ(j["per_length"].size(), r.per_length.size());

  const std::string table = rte_table(r, "synthetic");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), static_cast<long>(r.per_length.size()) + 2);
  EXPECT_NE(table.find("avg"), std::string::npos);
}
