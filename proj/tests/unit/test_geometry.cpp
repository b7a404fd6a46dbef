// Copyright 2026 The coeforge Authors
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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "coeforge/error.hpp"
#include "coeforge/geometry.hpp"

namespace coeforge {
namespace {

// Area oracle written independently of the library: clip the intersection
// rectangle by hand.
double oracle_iou(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double h = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = w * h;
  return inter / (a.area() + b.area() - inter);
}

BoundingBox random_box(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  double x1 = u(rng), x2 = u(rng), y1 = u(rng), y2 = u(rng);
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return make_box(x1, y1, x2 + 0.01, y2 + 0.01);
}

TEST(Iou, Identity) { EXPECT_EQ(iou(make_box(0, 0, 10, 10), make_box(0, 0, 10, 10)), 1.0); }

TEST(Iou, Disjoint) { EXPECT_EQ(iou(make_box(0, 0, 10, 10), make_box(20, 20, 30, 30)), 0.0); }

TEST(Iou, DiagonalOverlap) {
  EXPECT_NEAR(iou(make_box(0, 0, 10, 10), make_box(5, 5, 15, 15)), 25.0 / 175.0, 1e-12);
}

TEST(Iou, HalfShift) {
  EXPECT_NEAR(iou(make_box(0, 0, 10, 10), make_box(5, 0, 15, 10)), 50.0 / 150.0, 1e-12);
}

TEST(Iou, TouchingEdgesGiveZero) {
  EXPECT_EQ(iou(make_box(0, 0, 10, 10), make_box(10, 0, 20, 10)), 0.0);
  EXPECT_EQ(intersection_area(make_box(0, 0, 10, 10), make_box(0, 10, 10, 20)), 0.0);
}

TEST(Iou, ContainedBox) {
  EXPECT_NEAR(iou(make_box(0, 0, 10, 10), make_box(2, 2, 7, 7)), 25.0 / 100.0, 1e-12);
}

TEST(Iou, SymmetricBoundedAndMatchesOracle) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto a = random_box(rng);
    const auto b = random_box(rng);
    const double v = iou(a, b);
    EXPECT_EQ(v, iou(b, a));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_NEAR(v, oracle_iou(a, b), 1e-12);
    EXPECT_NEAR(iou(a, a), 1.0, 1e-15);
  }
}

TEST(MaxPairwiseIou, VacuousCases) {
  EXPECT_EQ(max_pairwise_iou({}), 0.0);
  const std::vector<BoundingBox> one{make_box(0, 0, 1, 1)};
  EXPECT_EQ(max_pairwise_iou(one), 0.0);
}

TEST(MaxPairwiseIou, IdenticalPair) {
  const std::vector<BoundingBox> two{make_box(3, 3, 9, 9), make_box(3, 3, 9, 9)};
  EXPECT_EQ(max_pairwise_iou(two), 1.0);
}

TEST(MaxPairwiseIou, ThreeBoxes) {
  const std::vector<BoundingBox> boxes{make_box(0, 0, 10, 10), make_box(5, 5, 15, 15),
                                       make_box(100, 100, 110, 110)};
  EXPECT_NEAR(max_pairwise_iou(boxes), 25.0 / 175.0, 1e-12);
}

TEST(MaxPairwiseIou, PermutationInvariantAndMatchesNaiveLoop) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<BoundingBox> boxes;
    const int n = static_cast<int>(rng() % 6);
    for (int i = 0; i < n; ++i) boxes.push_back(random_box(rng));
    double naive = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j) naive = std::max(naive, oracle_iou(boxes[i], boxes[j]));
      }
    }
    const double v = max_pairwise_iou(boxes);
    EXPECT_NEAR(v, naive, 1e-12);
    std::shuffle(boxes.begin(), boxes.end(), rng);
    EXPECT_EQ(max_pairwise_iou(boxes), v);
  }
}

TEST(ClampToPage, ClipsOvershoot) {
  const PageRef page{"p", "p.png", 10, 10};
  // Negative coordinates cannot form a BoundingBox, so overshoot is on the far side.
  const auto r = clamp_to_page(make_box(0, 0, 20, 20), page);
  EXPECT_EQ(r.box, make_box(0, 0, 10, 10));
  EXPECT_EQ(r.page, page);
}

TEST(ClampToPage, LeavesInteriorBoxUnchanged) {
  const PageRef page{"p", "p.png", 10, 10};
  EXPECT_EQ(clamp_to_page(make_box(2, 2, 8, 8), page).box, make_box(2, 2, 8, 8));
}

TEST(ClampToPage, OffPageIsEmpty) {
  const PageRef page{"p", "p.png", 10, 10};
  try {
    clamp_to_page(make_box(50, 50, 60, 60), page);
    FAIL() << "expected EmptyAfterClamp";
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kEmptyAfterClamp);
  }
}

TEST(ClampToPage, TouchingPageEdgeIsEmpty) {
  const PageRef page{"p", "p.png", 10, 10};
  EXPECT_THROW(clamp_to_page(make_box(10, 0, 20, 5), page), Error);
}

}  // namespace
}  // namespace coeforge
