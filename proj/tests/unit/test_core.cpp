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

#include <cmath>
#include <limits>

#include "coeforge/core.hpp"
#include "coeforge/error.hpp"

namespace coeforge {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& err) {
    return err.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

std::vector<PageRef> two_pages() {
  return {{"a", "a.png", 100, 100}, {"b", "b.png", 50, 80}};
}

TEST(MakeBox, AcceptsValidBox) {
  const auto b = make_box(0, 0, 10, 10);
  EXPECT_EQ(b.area(), 100.0);
  EXPECT_EQ(b.width(), 10.0);
  EXPECT_EQ(b.height(), 10.0);
}

TEST(MakeBox, KeepsFractionalCoordinates) {
  const auto b = make_box(1.25, 2.5, 3.75, 4.0);
  EXPECT_DOUBLE_EQ(b.area(), 2.5 * 1.5);
}

TEST(MakeBox, RejectsZeroWidth) {
  EXPECT_EQ(code_of([] { make_box(5, 5, 5, 9); }), ErrorCode::kDegenerateBox);
}

TEST(MakeBox, RejectsInvertedBox) {
  EXPECT_EQ(code_of([] { make_box(10, 0, 5, 9); }), ErrorCode::kDegenerateBox);
  EXPECT_EQ(code_of([] { make_box(0, 9, 5, 1); }), ErrorCode::kDegenerateBox);
}

TEST(MakeBox, RejectsNegativeCoordinate) {
  EXPECT_EQ(code_of([] { make_box(-1, 0, 4, 4); }), ErrorCode::kNegativeCoordinate);
}

TEST(MakeBox, RejectsNonFinite) {
  EXPECT_EQ(code_of([] { make_box(0, 0, std::numeric_limits<double>::infinity(), 4); }),
            ErrorCode::kDegenerateBox);
  EXPECT_EQ(code_of([] { make_box(0, 0, std::nan(""), 4); }), ErrorCode::kDegenerateBox);
}

TEST(PageIndex, ConvertsBetweenConventions) {
  EXPECT_EQ(page_index_from_pos(0), 1);
  EXPECT_EQ(page_index_from_pos(2), 3);
  EXPECT_EQ(pos_from_page_index(1), 0);
  for (int p = 0; p < 10; ++p) EXPECT_EQ(pos_from_page_index(page_index_from_pos(p)), p);
}

TEST(Trajectory, CountsEvidence) {
  CoETrajectory t;
  t.steps = {{"a", {{1, make_box(0, 0, 1, 1)}}},
             {"b", {}},
             {"c", {{1, make_box(0, 0, 2, 2)}, {2, make_box(1, 1, 3, 3)}}}};
  EXPECT_EQ(t.evidence_count(), 3u);
}

TEST(Trajectory, AnswerEvidenceInChain) {
  CoETrajectory t;
  const EvidenceRef ev{1, make_box(0, 0, 1, 1)};
  t.steps = {{"a", {ev}}};
  EXPECT_FALSE(t.answer_evidence_in_chain());
  t.answer_evidence = ev;
  EXPECT_TRUE(t.answer_evidence_in_chain());
  t.answer_evidence = EvidenceRef{2, ev.box};
  EXPECT_FALSE(t.answer_evidence_in_chain());
}

TEST(Trajectory, SameStructureIgnoresRaw) {
  CoETrajectory a;
  a.steps = {{"x", {}}};
  a.raw = "one";
  CoETrajectory b = a;
  b.raw = "two";
  EXPECT_TRUE(same_structure(a, b));
  b.answer_text = "y";
  EXPECT_FALSE(same_structure(a, b));
}

TEST(GroundTruth, AnswerableFactorySetsPageIndex) {
  const auto r = make_answerable("q", "?", "42", make_box(0, 0, 5, 5), two_pages(), 1);
  EXPECT_TRUE(r.answerable());
  ASSERT_TRUE(r.gold_page_index.has_value());
  EXPECT_EQ(*r.gold_page_index, 2);
}

TEST(GroundTruth, UnanswerableFactory) {
  const auto r = make_unanswerable("q", "?", two_pages());
  EXPECT_FALSE(r.answerable());
  EXPECT_EQ(r.gold_answer, "No answer");
  EXPECT_FALSE(r.gold_box.has_value());
  EXPECT_FALSE(r.gold_page_index.has_value());
}

TEST(GroundTruth, RejectsInconsistentRecords) {
  auto r = make_answerable("q", "?", "42", make_box(0, 0, 5, 5), two_pages(), 0);
  auto broken = r;
  broken.gold_page_index = 2;
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kSchemaError);

  broken = r;
  broken.gold_box.reset();
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kSchemaError);

  broken = r;
  broken.gold_answer = "No answer";
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kSchemaError);

  broken = r;
  broken.pos_idx = 5;
  broken.gold_page_index = 6;
  EXPECT_EQ(code_of([&] { broken.validate(); }), ErrorCode::kSchemaError);

  auto u = make_unanswerable("q", "?", two_pages());
  u.gold_box = make_box(0, 0, 1, 1);
  EXPECT_EQ(code_of([&] { u.validate(); }), ErrorCode::kSchemaError);

  auto v = make_unanswerable("q", "?", two_pages());
  v.gold_answer = "42";
  EXPECT_EQ(code_of([&] { v.validate(); }), ErrorCode::kSchemaError);
}

TEST(GroundTruth, RejectsBadPages) {
  auto pages = two_pages();
  pages[1].width = 0;
  EXPECT_EQ(code_of([&] { make_unanswerable("q", "?", pages); }), ErrorCode::kSchemaError);
}

TEST(RewardConfigTest, DefaultsMatchTrainingSettings) {
  const RewardConfig c;
  EXPECT_EQ(c.tau, 0.3);
  EXPECT_EQ(c.delta, 0.5);
  EXPECT_EQ(c.epsilon, 0.4);
  EXPECT_EQ(c.gamma, 0.8);
  EXPECT_EQ(c.iou_at, 0.5);
  EXPECT_NO_THROW(c.validate());
}

TEST(RewardConfigTest, RejectsOutOfRange) {
  RewardConfig c;
  c.tau = 0.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.tau = 1.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.delta = 0.0;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.delta = 1.0;
  EXPECT_NO_THROW(c.validate());
  c = {};
  c.epsilon = 1.5;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.gamma = -0.1;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
  c = {};
  c.weights.step = -1;
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(Breakdown, TotalIsExactSumAtUnitWeights) {
  RewardBreakdown b;
  b.r_acc = 0.75;
  b.r_step = 0.5;
  b.r_ground = 1;
  b.r_format = 1;
  finalize_total(b, {});
  EXPECT_EQ(b.total, 0.75 + 0.5 + 1.0 + 1.0);
}

TEST(Breakdown, WeightsScaleComponents) {
  RewardBreakdown b;
  b.r_acc = 1;
  b.r_step = 1;
  b.r_ground = 0;
  b.r_format = 1;
  finalize_total(b, {2.0, 0.5, 1.0, 1.0});
  EXPECT_EQ(b.total, 3.5);
}

TEST(ErrorNames, AreStable) {
  EXPECT_EQ(error_code_name(ErrorCode::kPageOutOfRange), "PageOutOfRange");
  EXPECT_EQ(error_code_name(ErrorCode::kProviderUnavailable), "ProviderUnavailable");
  EXPECT_EQ(static_cast<int>(ErrorCode::kIoError), 17);
}

}  // namespace
}  // namespace coeforge
