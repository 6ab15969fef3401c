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

#include <algorithm>
#include <random>

#include "detfuse/geometry.hpp"

namespace detfuse {
namespace {

// Counts unit pixels covered by each integer box on a grid.
double raster_iou(const BoundingBox& a, const BoundingBox& b) {
  const int lo_x = static_cast<int>(std::min(a.x, b.x));
  const int lo_y = static_cast<int>(std::min(a.y, b.y));
  const int hi_x = static_cast<int>(std::max(a.right(), b.right()));
  const int hi_y = static_cast<int>(std::max(a.bottom(), b.bottom()));
  auto inside = [](const BoundingBox& r, int px, int py) {
    return px >= r.x && px < r.right() && py >= r.y && py < r.bottom();
  };
  long inter = 0, uni = 0;
  for (int py = lo_y; py < hi_y; ++py) {
    for (int px = lo_x; px < hi_x; ++px) {
      const bool ia = inside(a, px, py), ib = inside(b, px, py);
      inter += ia && ib;
      uni += ia || ib;
    }
  }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BoundingBox random_int_box(std::mt19937& rng, int extent) {
  std::uniform_int_distribution<int> pos(0, extent - 2);
  const int x = pos(rng), y = pos(rng);
  std::uniform_int_distribution<int> wd(1, extent - x), hd(1, extent - y);
  return {double(x), double(y), double(wd(rng)), double(hd(rng))};
}

BoundingBox random_box(std::mt19937& rng) {
  std::uniform_real_distribution<double> pos(-50.0, 50.0), size(0.1, 40.0);
  return {pos(rng), pos(rng), size(rng), size(rng)};
}

TEST(Iou, IdenticalBoxes) {
  const BoundingBox a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
}

TEST(Iou, DisjointBoxes) { EXPECT_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0); }

TEST(Iou, TouchingEdgesDoNotOverlap) { EXPECT_EQ(iou({0, 0, 10, 10}, {10, 0, 10, 10}), 0.0); }

TEST(Iou, PartialOverlapMatchesRasterOracle) {
  const BoundingBox a{0, 0, 10, 10}, b{5, 5, 10, 10};
  const double oracle = raster_iou(a, b);
  EXPECT_DOUBLE_EQ(oracle, 25.0 / 175.0);
  EXPECT_NEAR(iou(a, b), oracle, 1e-9);
  EXPECT_NEAR(iou(a, b), 0.142857, 1e-6);
}

TEST(Iou, RandomIntegerBoxesAgreeWithRaster) {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    const BoundingBox a = random_int_box(rng, 30), b = random_int_box(rng, 30);
    ASSERT_NEAR(iou(a, b), raster_iou(a, b), 1e-9) << i;
  }
}

TEST(Iou, SymmetricBoundedTranslationInvariant) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> shift(-1000.0, 1000.0);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a = random_box(rng), b = random_box(rng);
    const double v = iou(a, b);
    ASSERT_EQ(v, iou(b, a));
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    ASSERT_DOUBLE_EQ(iou(a, a), 1.0);
    const double dx = std::round(shift(rng)), dy = std::round(shift(rng));
    ASSERT_NEAR(iou(translated(a, dx, dy), translated(b, dx, dy)), v, 1e-9);
  }
}

TEST(Center, Examples) {
  EXPECT_EQ(center({0, 0, 10, 10}), (Point{5, 5}));
  EXPECT_EQ(center({2, 4, 6, 8}), (Point{5, 8}));
  EXPECT_EQ(center({0, 0, 1, 1}), (Point{0.5, 0.5}));
}

TEST(CenterDistance, Examples) {
  const BoundingBox a{0, 0, 10, 10};
  EXPECT_EQ(center_distance(a, a), 0.0);
  // Centers (0,0) and (3,4).
  EXPECT_DOUBLE_EQ(center_distance({-1, -1, 2, 2}, {2, 3, 2, 2}), 5.0);
  EXPECT_DOUBLE_EQ(center_distance(a, {10, 0, 10, 10}), 10.0);
}

TEST(CenterDistance, MetricProperties) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> shift(-500.0, 500.0);
  for (int i = 0; i < 2000; ++i) {
    const BoundingBox a = random_box(rng), b = random_box(rng), c = random_box(rng);
    const double ab = center_distance(a, b);
    ASSERT_EQ(ab, center_distance(b, a));
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(center_distance(a, c), ab + center_distance(b, c) + 1e-9);
    const double dx = shift(rng), dy = shift(rng);
    ASSERT_NEAR(center_distance(translated(a, dx, dy), translated(b, dx, dy)), ab, 1e-9);
  }
}

TEST(ClampToFrame, ClipsToImage) {
  EXPECT_EQ(clamp_to_frame({-10, -10, 40, 40}, 100, 100), (BoundingBox{0, 0, 30, 30}));
  EXPECT_EQ(clamp_to_frame({90, 90, 20, 20}, 100, 100), (BoundingBox{90, 90, 10, 10}));
  EXPECT_FALSE(is_valid(clamp_to_frame({200, 200, 5, 5}, 100, 100)));
}

TEST(BoundingBox, Validity) {
  EXPECT_TRUE(is_valid({0, 0, 1, 1}));
  EXPECT_FALSE(is_valid({0, 0, 0, 1}));
  EXPECT_FALSE(is_valid({0, 0, 1, -1}));
  EXPECT_FALSE(is_valid({std::nan(""), 0, 1, 1}));
  EXPECT_FALSE(is_valid({0, 0, INFINITY, 1}));
}

}  // namespace
}  // namespace detfuse
