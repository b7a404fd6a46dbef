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
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "coeforge/embedding.hpp"
#include "coeforge/error.hpp"
#include "coeforge/imaging.hpp"
#include "coeforge/textmatch.hpp"

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

double norm(const EmbeddingVector& v) {
  double s = 0;
  for (double x : v.values()) s += x * x;
  return std::sqrt(s);
}

TEST(NormalizeVector, ThreeFourFive) {
  const auto v = normalize_vector({3, 4});
  EXPECT_DOUBLE_EQ(v.values()[0], 0.6);
  EXPECT_DOUBLE_EQ(v.values()[1], 0.8);
}

TEST(NormalizeVector, UnitVectorUnchanged) {
  const auto v = normalize_vector({0, 1, 0});
  EXPECT_EQ(std::vector<double>(v.values().begin(), v.values().end()), (std::vector<double>{0, 1, 0}));
}

TEST(NormalizeVector, ZeroVectorRejected) {
  EXPECT_EQ(code_of([] { normalize_vector({0, 0}); }), ErrorCode::kZeroVector);
  EXPECT_EQ(code_of([] { normalize_vector({}); }), ErrorCode::kZeroVector);
}

TEST(Cosine, Identity) {
  const auto u = normalize_vector({0.3, -2, 7});
  EXPECT_NEAR(cosine(u, u), 1.0, 1e-6);
}

TEST(Cosine, Orthogonal) { EXPECT_EQ(cosine(normalize_vector({1, 0}), normalize_vector({0, 1})), 0.0); }

TEST(Cosine, FortyFiveDegrees) {
  const double h = std::sqrt(2.0) / 2.0;
  EXPECT_NEAR(cosine(normalize_vector({1, 0}), normalize_vector({h, h})), h, 1e-12);
}

TEST(Cosine, DimensionMismatch) {
  EXPECT_EQ(code_of([] { cosine(normalize_vector({1, 0}), normalize_vector({1, 0, 0})); }),
            ErrorCode::kDimensionMismatch);
}

TEST(Cosine, ScaleInvariance) {
  const std::vector<double> raw{0.2, -1.5, 3.0, 0.0, 9.0};
  for (double alpha : {1e-6, 0.5, 3.0, 1e6}) {
    std::vector<double> scaled = raw;
    for (auto& x : scaled) x *= alpha;
    EXPECT_NEAR(cosine(normalize_vector(scaled), normalize_vector(raw)), 1.0, 1e-12);
  }
}

TEST(Fnv1a, PublishedTestVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(MockText, DeterministicAndNormalized) {
  const auto a = mock_encode_text("The revenue grew", 256);
  const auto b = mock_encode_text("The revenue grew", 256);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.dimension(), 256u);
  EXPECT_NEAR(norm(a), 1.0, 1e-12);
  EXPECT_NEAR(cosine(a, b), 1.0, 1e-12);
}

TEST(MockText, PermutedTokensGiveIdenticalVector) {
  EXPECT_EQ(mock_encode_text("alpha beta gamma beta", 64), mock_encode_text("beta gamma beta alpha", 64));
}

TEST(MockText, NormalizationAppliesBeforeHashing) {
  EXPECT_EQ(mock_encode_text("The Revenue, grew!", 64), mock_encode_text("revenue grew", 64));
}

TEST(MockText, BucketAndSignFollowHash) {
  // A single token lands in bucket h % d with sign from bit 63.
  const std::uint64_t h = fnv1a64("revenue");
  const auto v = mock_encode_text("revenue", 32);
  for (std::size_t i = 0; i < 32; ++i) {
    const double expected = i == h % 32 ? ((h >> 63) ? -1.0 : 1.0) : 0.0;
    EXPECT_EQ(v.values()[i], expected);
  }
}

TEST(MockText, EmptyTextIsZeroVector) {
  EXPECT_EQ(code_of([] { mock_encode_text("the ...", 64); }), ErrorCode::kZeroVector);
}

TEST(MockText, SmallDimensionRejected) {
  EXPECT_EQ(code_of([] { mock_encode_text("x", 4); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { MockEncoder(7); }), ErrorCode::kInvalidArgument);
}

std::vector<std::string> corpus_lines() {
  std::ifstream in(std::string(COEFORGE_TEST_DATA) + "/mock_corpus.txt");
  EXPECT_TRUE(in.good());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

bool token_disjoint(const std::string& a, const std::string& b) {
  const auto ta = normalize(a).tokens;
  const std::set<std::string> sa(ta.begin(), ta.end());
  for (const auto& t : normalize(b).tokens) {
    if (sa.count(t)) return false;
  }
  return true;
}

TEST(MockText, TokenDisjointCorpusPairsAreNearlyOrthogonal) {
  const auto lines = corpus_lines();
  ASSERT_GE(lines.size(), 10u);
  std::size_t pairs = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (!token_disjoint(lines[i], lines[j])) continue;
      ++pairs;
      const double c = cosine(mock_encode_text(lines[i], 256), mock_encode_text(lines[j], 256));
      worst = std::max(worst, std::abs(c));
      EXPECT_LT(std::abs(c), 0.3) << lines[i] << " | " << lines[j];
    }
  }
  EXPECT_GE(pairs, 20u);
  // Frozen value for the checked-in corpus.
  EXPECT_NEAR(worst, 0.2461829819586655, 1e-12);
}

const std::vector<TextRegion> kRegions{
    {make_box(0, 0, 100, 50), "alpha beta gamma"},
    {make_box(0, 100, 100, 150), "delta epsilon zeta"},
    {make_box(0, 200, 100, 250), "eta theta iota"},
};

TEST(MockImage, ExactRegionCropEqualsText) {
  const auto img = mock_encode_image(kRegions, kRegions[0].box, 256);
  EXPECT_EQ(img, mock_encode_text(kRegions[0].text, 256));
  EXPECT_NEAR(cosine(img, mock_encode_text(kRegions[0].text, 256)), 1.0, 1e-12);
}

TEST(MockImage, CropOutsideAllRegionsIsZeroVector) {
  EXPECT_EQ(code_of([] { mock_encode_image(kRegions, make_box(0, 60, 100, 90), 256); }),
            ErrorCode::kZeroVector);
}

TEST(MockImage, PartialCoverageWeightsByArea) {
  // Half of region A, all of region B.
  const auto crop = make_box(0, 25, 100, 150);
  const auto img = mock_encode_image(kRegions, crop, 256);
  const double with_b = cosine(img, mock_encode_text(kRegions[1].text, 256));
  const double with_a = cosine(img, mock_encode_text(kRegions[0].text, 256));
  const double with_c = cosine(img, mock_encode_text(kRegions[2].text, 256));
  EXPECT_GT(with_b, with_c);
  EXPECT_GT(with_b, with_a);
  const auto weights = regions_in_crop(kRegions, crop);
  ASSERT_EQ(weights.size(), 2u);
  EXPECT_DOUBLE_EQ(weights[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(weights[1].weight, 1.0);
}

TEST(MockEncoderTest, RegisteredLayoutDrivesCrops) {
  MockEncoder enc(128);
  const PageRef page{"p1", "", 100, 300};
  enc.register_layout("p1", kRegions);
  const auto v = enc.embed_crop({kRegions[2].box, page});
  EXPECT_NEAR(cosine(v, enc.embed_text("eta theta iota")), 1.0, 1e-12);
}

TEST(MockEncoderTest, ReadsSidecarLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "coeforge_sidecar_test";
  std::filesystem::create_directories(dir);
  const auto image = (dir / "page.png").string();
  std::ofstream(region_sidecar_path(image))
      << R"({"regions": [{"box": [10, 10, 90, 40], "text": "quarterly sales rose"}]})";
  MockEncoder enc(64);
  const PageRef page{"sidecar-page", image, 100, 100};
  const auto v = enc.embed_crop({make_box(10, 10, 90, 40), page});
  EXPECT_NEAR(cosine(v, enc.embed_text("Quarterly sales rose.")), 1.0, 1e-12);

  const PageRef via_url{"sidecar-page-2", "file://" + image, 100, 100};
  EXPECT_NO_THROW(enc.embed_crop({make_box(10, 10, 90, 40), via_url}));
}

TEST(MockEncoderTest, BadSidecarIsSchemaError) {
  const auto dir = std::filesystem::temp_directory_path() / "coeforge_sidecar_bad";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "x.png.regions.json").string();
  std::ofstream(path) << R"({"regions": [{"box": [1, 2], "text": "x"}]})";
  EXPECT_EQ(code_of([&] { load_region_sidecar(path); }), ErrorCode::kSchemaError);
}

TEST(MockEncoderTest, ImageBytesWithoutLayoutHashDeterministically) {
  MockEncoder enc(64);
  std::vector<std::uint8_t> rgb(4 * 4 * 3, 10);
  const auto png = encode_png(4, 4, rgb);
  EXPECT_EQ(enc.embed_image(png), enc.embed_image(png));
  rgb[0] = 200;
  EXPECT_NE(enc.embed_image(png), enc.embed_image(encode_png(4, 4, rgb)));
}

TEST(ScaledEncoderTest, PreservesCosines) {
  auto inner = std::make_shared<MockEncoder>(64);
  inner->register_layout("p", kRegions);
  const ScaledEncoder scaled(inner, 1234.5);
  const PageRef page{"p", "", 100, 300};
  const auto a = cosine(inner->embed_crop({make_box(0, 25, 100, 150), page}), inner->embed_text("delta"));
  const auto b = cosine(scaled.embed_crop({make_box(0, 25, 100, 150), page}), scaled.embed_text("delta"));
  EXPECT_NEAR(a, b, 1e-12);
  EXPECT_THROW(ScaledEncoder(inner, 0.0), Error);
}

TEST(MakeEncoder, ParsesSpecs) {
  EXPECT_EQ(make_encoder("mock:256")->dimension(), 256u);
  EXPECT_EQ(code_of([] { make_encoder("mock:"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { make_encoder("mock:12x"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { make_encoder("mock:4"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { make_encoder("ftp://x"); }), ErrorCode::kInvalidArgument);
  EXPECT_NE(make_encoder("http://127.0.0.1:9"), nullptr);
}

}  // namespace
}  // namespace coeforge
