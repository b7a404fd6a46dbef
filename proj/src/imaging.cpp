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

#include "coeforge/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <jpeglib.h>
#include <openssl/evp.h>
#include <png.h>

#include "coeforge/error.hpp"

namespace coeforge {
namespace {

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return b.size() >= 8 && std::equal(std::begin(kSig), std::end(kSig), b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

PageImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    fail(ErrorCode::kDecodeError, std::string("PNG header: ") + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  PageImage out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.rgb.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    fail(ErrorCode::kDecodeError, "PNG data: " + msg);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// libjpeg treats premature end of data as a warning; make it fatal.
void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);
}

PageImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  PageImage out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorCode::kDecodeError, std::string("JPEG: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kDecodeError, "cannot read image " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string cache_key(const PageRef& ref) {
  return ref.image_locator + '\n' + std::to_string(ref.width) + 'x' + std::to_string(ref.height);
}

}  // namespace

PageImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_jpeg(bytes)) return decode_jpeg(bytes);
  fail(ErrorCode::kDecodeError, "unrecognized image format (expected PNG or JPEG)");
}

std::vector<std::uint8_t> encode_png(int width, int height, std::span<const std::uint8_t> rgb) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    fail(ErrorCode::kInvalidArgument, "raster size does not match dimensions");
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, rgb.data(), 0, nullptr)) {
    fail(ErrorCode::kInvalidArgument, std::string("PNG encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, rgb.data(), 0, nullptr)) {
    fail(ErrorCode::kInvalidArgument, std::string("PNG encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorCode::kIoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string resolve_locator(const std::string& locator) {
  constexpr std::string_view kFile = "file://";
  constexpr std::string_view kBlob = "sha256:";
  if (locator.rfind(kFile, 0) == 0) return locator.substr(kFile.size());
  if (locator.rfind(kBlob, 0) == 0) {
    const char* root = std::getenv("COEFORGE_BLOB_ROOT");
    return (std::filesystem::path(root ? root : ".") / locator.substr(kBlob.size())).string();
  }
  return locator;
}

PageImage load_page(const PageRef& ref) {
  const auto bytes = read_file(resolve_locator(ref.image_locator));
  if (ref.image_locator.rfind("sha256:", 0) == 0) {
    std::string want = ref.image_locator.substr(7);
    std::transform(want.begin(), want.end(), want.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (sha256_hex(bytes) != want) {
      fail(ErrorCode::kDecodeError, "blob content does not match " + ref.image_locator);
    }
  }
  PageImage image = decode_image(bytes);
  if (image.width != ref.width || image.height != ref.height) {
    fail(ErrorCode::kImageDimensionMismatch,
         "page '" + ref.page_id + "' declares " + std::to_string(ref.width) + "x" +
             std::to_string(ref.height) + " but image is " + std::to_string(image.width) + "x" +
             std::to_string(image.height));
  }
  image.origin = ref;
  return image;
}

PixelRect snap_outward(const BoundingBox& box, int width, int height) {
  auto clip = [](double v, int hi) {
    return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi)));
  };
  return PixelRect{clip(std::floor(box.x1), width), clip(std::floor(box.y1), height),
                   clip(std::ceil(box.x2), width), clip(std::ceil(box.y2), height)};
}

std::vector<std::uint8_t> crop(const PageImage& image, const CropRegion& region) {
  const PixelRect r = snap_outward(region.box, image.width, image.height);
  const int w = r.x1 - r.x0;
  const int h = r.y1 - r.y0;
  if (w <= 0 || h <= 0) fail(ErrorCode::kEmptyAfterClamp, "crop region is empty");
  std::vector<std::uint8_t> sub(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    const auto src = image.pixel(r.x0, r.y0 + y);
    std::copy_n(src.data(), static_cast<std::size_t>(w) * 3,
                sub.data() + static_cast<std::size_t>(y) * w * 3);
  }
  return encode_png(w, h, sub);
}

PageCache::PageCache(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

std::shared_ptr<const PageImage> PageCache::get(const PageRef& ref) {
  const std::string key = cache_key(ref);
  {
    std::lock_guard lock(mu_);
    if (auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
  }
  auto decoded = std::make_shared<const PageImage>(load_page(ref));
  std::lock_guard lock(mu_);
  if (auto it = index_.find(key); it != index_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second);
    return it->second->second;
  }
  lru_.emplace_front(key, decoded);
  index_[key] = lru_.begin();
  while (lru_.size() > capacity_) {
    index_.erase(lru_.back().first);
    lru_.pop_back();
  }
  return decoded;
}

std::size_t PageCache::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

PageCache& default_page_cache() {
  static PageCache cache(64);
  return cache;
}

}  // namespace coeforge
