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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "coeforge/error.hpp"
#include "coeforge/imaging.hpp"

namespace coeforge {
namespace {

namespace fs = std::filesystem;

const std::string kImages = std::string(COEFORGE_TEST_DATA) + "/images";

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spill(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& err) {
    return err.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

// Raster whose pixel values encode their coordinates.
std::vector<std::uint8_t> coordinate_raster(int w, int h) {
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto* p = &rgb[(static_cast<std::size_t>(y) * w + x) * 3];
      p[0] = static_cast<std::uint8_t>(x);
      p[1] = static_cast<std::uint8_t>(y);
      p[2] = static_cast<std::uint8_t>(x ^ y);
    }
  }
  return rgb;
}

PageImage raster_page(int w, int h) {
  return decode_image(encode_png(w, h, coordinate_raster(w, h)));
}

TEST(Decode, PngRoundTripIsLossless) {
  const auto rgb = coordinate_raster(100, 50);
  const auto img = decode_image(encode_png(100, 50, rgb));
  EXPECT_EQ(img.width, 100);
  EXPECT_EQ(img.height, 50);
  EXPECT_EQ(img.rgb, rgb);
}

TEST(Decode, CheckedInPngs) {
  const auto g = decode_image(slurp(kImages + "/gradient_20x10.png"));
  EXPECT_EQ(g.width, 20);
  EXPECT_EQ(g.height, 10);
  const auto px = g.pixel(3, 2);
  EXPECT_EQ(px[0], 36);
  EXPECT_EQ(px[1], 50);
  EXPECT_EQ(px[2], 6);

  // Grayscale input expands to RGB.
  const auto gray = decode_image(slurp(kImages + "/gray_5x4.png"));
  EXPECT_EQ(gray.rgb.size(), 5u * 4u * 3u);
  for (auto v : gray.rgb) EXPECT_EQ(v, 77);
}

TEST(Decode, Jpeg) {
  const auto img = decode_image(slurp(kImages + "/solid_16x8.jpg"));
  EXPECT_EQ(img.width, 16);
  EXPECT_EQ(img.height, 8);
  const auto px = img.pixel(5, 5);
  EXPECT_NEAR(px[0], 200, 4);
  EXPECT_NEAR(px[1], 30, 4);
  EXPECT_NEAR(px[2], 60, 4);
}

TEST(Decode, TruncatedFilesFail) {
  auto png = slurp(kImages + "/gradient_20x10.png");
  png.resize(png.size() / 2);
  EXPECT_EQ(code_of([&] { decode_image(png); }), ErrorCode::kDecodeError);
  auto jpg = slurp(kImages + "/solid_16x8.jpg");
  jpg.resize(jpg.size() / 2);
  EXPECT_EQ(code_of([&] { decode_image(jpg); }), ErrorCode::kDecodeError);
}

TEST(Decode, GarbageFails) {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_EQ(code_of([&] { decode_image(junk); }), ErrorCode::kDecodeError);
  EXPECT_EQ(code_of([&] { decode_image({}); }), ErrorCode::kDecodeError);
}

class PageFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("coeforge_imaging_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
    spill(dir_ / "page.png", encode_png(100, 50, coordinate_raster(100, 50)));
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(PageFiles, LoadsMatchingPage) {
  const PageRef ref{"p", (dir_ / "page.png").string(), 100, 50};
  const auto img = load_page(ref);
  EXPECT_EQ(img.width, 100);
  EXPECT_EQ(img.origin, ref);
}

TEST_F(PageFiles, DimensionMismatch) {
  const PageRef ref{"p", (dir_ / "page.png").string(), 200, 50};
  EXPECT_EQ(code_of([&] { load_page(ref); }), ErrorCode::kImageDimensionMismatch);
}

TEST_F(PageFiles, MissingFile) {
  const PageRef ref{"p", (dir_ / "nope.png").string(), 100, 50};
  EXPECT_EQ(code_of([&] { load_page(ref); }), ErrorCode::kDecodeError);
}

TEST_F(PageFiles, FileUrlLocator) {
  const PageRef ref{"p", "file://" + (dir_ / "page.png").string(), 100, 50};
  EXPECT_NO_THROW(load_page(ref));
}

TEST_F(PageFiles, ContentAddressedBlob) {
  const auto bytes = slurp((dir_ / "page.png").string());
  const std::string digest = sha256_hex(bytes);
  spill(dir_ / digest, bytes);
  ::setenv("COEFORGE_BLOB_ROOT", dir_.c_str(), 1);
  EXPECT_NO_THROW(load_page({"p", "sha256:" + digest, 100, 50}));

  // A blob stored under the wrong name fails verification.
  const std::string bogus(64, 'a');
  spill(dir_ / bogus, bytes);
  EXPECT_EQ(code_of([&] { load_page({"p", "sha256:" + bogus, 100, 50}); }), ErrorCode::kDecodeError);
  ::unsetenv("COEFORGE_BLOB_ROOT");
}

TEST(Sha256, KnownDigest) {
  const std::string abc = "abc";
  EXPECT_EQ(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size())),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(SnapOutward, FractionalBox) {
  EXPECT_EQ(snap_outward(make_box(2.3, 2.3, 7.6, 7.6), 100, 100), (PixelRect{2, 2, 8, 8}));
}

TEST(SnapOutward, IntegerBoxUnchangedAndClipped) {
  EXPECT_EQ(snap_outward(make_box(2, 3, 7, 9), 100, 100), (PixelRect{2, 3, 7, 9}));
  EXPECT_EQ(snap_outward(make_box(90.5, 0, 150, 20), 100, 10), (PixelRect{90, 0, 100, 10}));
}

TEST(Crop, IdentityCrop) {
  const auto img = raster_page(40, 30);
  const PageRef page{"p", "", 40, 30};
  const auto out = decode_image(crop(img, {make_box(0, 0, 40, 30), page}));
  EXPECT_EQ(out.width, 40);
  EXPECT_EQ(out.height, 30);
  EXPECT_EQ(out.rgb, img.rgb);
}

TEST(Crop, UniformArea) {
  std::vector<std::uint8_t> rgb(20 * 20 * 3, 9);
  const auto img = decode_image(encode_png(20, 20, rgb));
  const auto out = decode_image(crop(img, {make_box(3, 4, 11, 17), {"p", "", 20, 20}}));
  for (auto v : out.rgb) EXPECT_EQ(v, 9);
}

TEST(Crop, FractionalSnapAndContainment) {
  const auto img = raster_page(20, 20);
  const auto out = decode_image(crop(img, {make_box(2.3, 2.3, 7.6, 7.6), {"p", "", 20, 20}}));
  ASSERT_EQ(out.width, 6);
  ASSERT_EQ(out.height, 6);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) {
      const auto a = out.pixel(x, y);
      const auto b = img.pixel(x + 2, y + 2);
      EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
    }
  }
}

TEST(Crop, Deterministic) {
  const auto img = raster_page(30, 30);
  const CropRegion r{make_box(1.5, 2.5, 20.2, 13), {"p", "", 30, 30}};
  EXPECT_EQ(crop(img, r), crop(img, r));
}

TEST_F(PageFiles, CacheEvictsLeastRecentlyUsed) {
  for (int i = 0; i < 3; ++i) {
    spill(dir_ / ("p" + std::to_string(i) + ".png"), encode_png(4, 4, coordinate_raster(4, 4)));
  }
  auto ref = [&](int i) { return PageRef{"p", (dir_ / ("p" + std::to_string(i) + ".png")).string(), 4, 4}; };
  PageCache cache(2);
  const auto first = cache.get(ref(0));
  cache.get(ref(1));
  EXPECT_EQ(cache.get(ref(0)), first);  // hit, refreshes p0
  cache.get(ref(2));                    // evicts p1
  EXPECT_EQ(cache.size(), 2u);
  EXPECT_EQ(cache.get(ref(0)), first);
  fs::remove(dir_ / "p1.png");
  EXPECT_THROW(cache.get(ref(1)), Error);  // p1 was evicted and must be reloaded
}

}  // namespace
}  // namespace coeforge
