// Copyright 2026 The detfuse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "detfuse/ensemble.hpp"
#include "detfuse/error.hpp"
#include "test_util.hpp"

namespace detfuse {
namespace {

using testing::det;

DetectionSet scored_set(std::initializer_list<double> scores, Source source, ImageId image = 1) {
  std::vector<Detection> dets;
  double x = 0;
  for (double s : scores) {
    dets.push_back(det(image, {x, 0, 10, 10}, s, {}, source));
    x += 20;
  }
  return make_detection_set(std::move(dets), source);
}

TEST(ThresholdEnsemble, DefaultThreshold) {
  const auto primary = scored_set({0.9, 0.04}, Source::kDiagnosisA);
  const auto secondary = scored_set({0.8, 0.03}, Source::kDiagnosisB);
  const DetectionSet out = threshold_ensemble(primary, secondary, {});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out.detections[0].score, 0.9);
  EXPECT_EQ(out.detections[0].box, primary.detections[0].box);
  EXPECT_EQ(out.detections[1].score, 0.03);
  EXPECT_EQ(out.detections[1].box, secondary.detections[1].box);
  EXPECT_EQ(out.source, Source::kFused);
  for (const auto& d : out.detections) EXPECT_EQ(d.source, Source::kFused);
}

TEST(ThresholdEnsemble, DefaultTauIsFivePercent) { EXPECT_EQ(EnsembleConfig{}.tau, 0.05); }

TEST(ThresholdEnsemble, BoundaryScoreGoesToPrimary) {
  const auto primary = scored_set({0.05}, Source::kDiagnosisA);
  const auto secondary = scored_set({0.05}, Source::kDiagnosisB);
  const EnsemblePartition p = partition_ensemble(primary, secondary, {});
  EXPECT_EQ(p.kept_primary.size(), 1u);
  EXPECT_TRUE(p.kept_secondary.empty());
}

TEST(ThresholdEnsemble, TauZeroKeepsAllPrimary) {
  const auto primary = scored_set({0.0, 0.5, 1.0}, Source::kDiagnosisA);
  const auto secondary = scored_set({0.0, 0.01, 0.7}, Source::kDiagnosisB);
  EnsembleConfig cfg;
  cfg.tau = 0.0;
  const DetectionSet out = threshold_ensemble(primary, secondary, cfg);
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out.detections[i].score, primary.detections[i].score);
}

TEST(ThresholdEnsemble, TauOneWithThreeThousandSecondary) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> low(0.0, 0.049);
  std::vector<Detection> sec, pri;
  for (int i = 0; i < 3000; ++i) sec.push_back(det(1, {double(i), 0, 5, 5}, low(rng)));
  for (int i = 0; i < 40; ++i) pri.push_back(det(1, {double(i), 9, 5, 5}, i % 4 == 0 ? 1.0 : 0.99));
  const auto primary = make_detection_set(pri, Source::kDiagnosisA);
  const auto secondary = make_detection_set(sec, Source::kDiagnosisB);
  EnsembleConfig cfg;
  cfg.tau = 1.0;
  const DetectionSet out = threshold_ensemble(primary, secondary, cfg);

  // Brute-force expectation.
  std::vector<Detection> expected;
  for (const auto& d : pri) if (d.score >= 1.0) expected.push_back(d);
  for (const auto& d : sec) if (d.score < 1.0) expected.push_back(d);
  for (auto& d : expected) d.source = Source::kFused;
  EXPECT_EQ(out.detections, expected);
  EXPECT_EQ(out.size(), 3000u + 10u);
}

TEST(ThresholdEnsemble, UniverseMismatch) {
  const auto primary = scored_set({0.9}, Source::kDiagnosisA, 1);
  const auto secondary = scored_set({0.01}, Source::kDiagnosisB, 2);
  try {
    threshold_ensemble(primary, secondary, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUniverseMismatch);
  }
  EnsembleConfig cfg;
  cfg.allow_universe_mismatch = true;
  const DetectionSet out = threshold_ensemble(primary, secondary, cfg);
  EXPECT_EQ(out.size(), 2u);
  EXPECT_EQ(out.image_universe, (std::set<ImageId>{1, 2}));
}

TEST(ThresholdEnsemble, RejectsTauOutsideUnitInterval) {
  EnsembleConfig cfg;
  cfg.tau = 1.5;
  EXPECT_THROW(threshold_ensemble({}, {}, cfg), Error);
  cfg.tau = -0.1;
  EXPECT_THROW(threshold_ensemble({}, {}, cfg), Error);
}

TEST(ThresholdEnsemble, RandomPartitionMonotonicityAndProvenance) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> count(0, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> pri, sec;
    for (int i = count(rng); i > 0; --i) pri.push_back(det(1, {u(rng) * 100, u(rng) * 100, 5, 5}, u(rng)));
    for (int i = count(rng); i > 0; --i) sec.push_back(det(1, {u(rng) * 100, u(rng) * 100, 5, 5}, u(rng) * 0.2));
    auto primary = make_detection_set(pri, Source::kDiagnosisA);
    auto secondary = make_detection_set(sec, Source::kDiagnosisB);
    primary.image_universe = secondary.image_universe = {1};
    EnsembleConfig cfg;
    cfg.tau = u(rng);
    const EnsemblePartition p = partition_ensemble(primary, secondary, cfg);
    EXPECT_EQ(p.kept_primary.size() + p.discarded_primary.size(), pri.size());
    EXPECT_EQ(p.kept_secondary.size() + p.discarded_secondary.size(), sec.size());
    const DetectionSet out = threshold_ensemble(primary, secondary, cfg);
    ASSERT_EQ(out.size(), p.kept_primary.size() + p.kept_secondary.size());
    for (std::size_t i = 0; i < p.kept_primary.size(); ++i) {
      Detection d = pri[p.kept_primary[i]];
      d.source = Source::kFused;
      ASSERT_EQ(out.detections[i], d);
    }
  }
}

}  // namespace
}  // namespace detfuse
