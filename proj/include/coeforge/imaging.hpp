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

#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "coeforge/core.hpp"
#include "coeforge/geometry.hpp"

namespace coeforge {

// Decoded 8-bit RGB raster, row-major, no padding.
struct PageImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
  PageRef origin;

  std::span<const std::uint8_t> pixel(int x, int y) const {
    return std::span(rgb).subspan((static_cast<std::size_t>(y) * width + x) * 3, 3);
  }
};

// PNG or JPEG bytes to RGB. Throws DecodeError.
PageImage decode_image(std::span<const std::uint8_t> bytes);

// Lossless, deterministic PNG encoding of an RGB raster.
std::vector<std::uint8_t> encode_png(int width, int height, std::span<const std::uint8_t> rgb);

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Locators are file paths, "file://" URLs or "sha256:<hex>" blobs under the
// blob root (COEFORGE_BLOB_ROOT, default ".").
std::string resolve_locator(const std::string& locator);

// Reads and decodes the page; throws DecodeError (also for a sha256: blob whose
// digest differs) or ImageDimensionMismatch.
PageImage load_page(const PageRef& ref);

// Pixel rectangle covered by a fractional box: floor on x1/y1, ceil on x2/y2,
// clipped to the image.
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};
PixelRect snap_outward(const BoundingBox& box, int width, int height);

// Sub-image as PNG bytes.
std::vector<std::uint8_t> crop(const PageImage& image, const CropRegion& region);

// Bounded LRU cache of decoded pages, safe for concurrent readers.
class PageCache {
 public:
  explicit PageCache(std::size_t capacity = 64);

  std::shared_ptr<const PageImage> get(const PageRef& ref);
  std::size_t size() const;

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const PageImage>>;

  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> lru_;
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
};

PageCache& default_page_cache();

}  // namespace coeforge
