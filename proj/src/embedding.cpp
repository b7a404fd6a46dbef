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

#include "coeforge/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "coeforge/error.hpp"
#include "coeforge/imaging.hpp"
#include "coeforge/remote_encoder.hpp"
#include "coeforge/textmatch.hpp"

namespace coeforge {

EmbeddingVector normalize_vector(std::vector<double> raw) {
  double sq = 0.0;
  for (double x : raw) sq += x * x;
  if (!(sq > 0.0) || !std::isfinite(sq)) {
    fail(ErrorCode::kZeroVector, "cannot normalize a zero or non-finite vector");
  }
  const double norm = std::sqrt(sq);
  for (double& x : raw) x /= norm;
  return EmbeddingVector(std::move(raw));
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dimension() != v.dimension()) {
    fail(ErrorCode::kDimensionMismatch, "cosine of vectors with dimensions " +
                                            std::to_string(u.dimension()) + " and " +
                                            std::to_string(v.dimension()));
  }
  double dot = 0.0;
  const auto a = u.values();
  const auto b = v.values();
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

EmbeddingVector EncoderProvider::embed_crop(const CropRegion& region) const {
  const auto page = default_page_cache().get(region.page);
  const auto png = crop(*page, region);
  return embed_image(png);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingVector mock_encode_weighted(std::span<const WeightedText> texts, std::size_t d) {
  if (d < 8) fail(ErrorCode::kInvalidArgument, "mock encoder dimension must be >= 8");
  // Accumulate per-token weight first so the result is independent of token order.
  std::map<std::string, double> weight;
  for (const auto& t : texts) {
    if (!(t.weight > 0.0)) continue;
    for (const auto& tok : normalize(t.text).tokens) weight[tok] += t.weight;
  }
  std::vector<double> acc(d, 0.0);
  for (const auto& [tok, w] : weight) {
    const std::uint64_t h = fnv1a64(tok);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    acc[h % d] += sign * w;
  }
  return normalize_vector(std::move(acc));
}

EmbeddingVector mock_encode_text(std::string_view text, std::size_t d) {
  const WeightedText one{std::string(text), 1.0};
  return mock_encode_weighted(std::span(&one, 1), d);
}

std::vector<WeightedText> regions_in_crop(std::span<const TextRegion> regions,
                                          const BoundingBox& crop) {
  std::vector<WeightedText> out;
  for (const auto& r : regions) {
    const double inter = intersection_area(r.box, crop);
    if (inter <= 0.0) continue;
    out.push_back({r.text, std::min(1.0, inter / r.box.area())});
  }
  return out;
}

EmbeddingVector mock_encode_image(std::span<const TextRegion> regions, const BoundingBox& crop,
                                  std::size_t d) {
  const auto weighted = regions_in_crop(regions, crop);
  if (weighted.empty()) {
    fail(ErrorCode::kZeroVector, "crop covers no text region");
  }
  return mock_encode_weighted(weighted, d);
}

MockEncoder::MockEncoder(std::size_t dimension) : dimension_(dimension) {
  if (dimension < 8) fail(ErrorCode::kInvalidArgument, "mock encoder dimension must be >= 8");
}

void MockEncoder::register_layout(const std::string& page_id, std::vector<TextRegion> regions) {
  std::lock_guard lock(mu_);
  by_page_id_[page_id] = std::make_shared<const std::vector<TextRegion>>(std::move(regions));
}

EmbeddingVector MockEncoder::embed_text(std::string_view text) const {
  return mock_encode_text(text, dimension_);
}

EmbeddingVector MockEncoder::embed_image(std::span<const std::uint8_t> png_bytes) const {
  // Byte 4-grams as tokens: deterministic, content-sensitive, no semantics.
  std::vector<double> acc(dimension_, 0.0);
  for (std::size_t i = 0; i + 4 <= png_bytes.size(); i += 4) {
    const std::string_view gram(reinterpret_cast<const char*>(png_bytes.data() + i), 4);
    const std::uint64_t h = fnv1a64(gram);
    acc[h % dimension_] += (h >> 63) ? -1.0 : 1.0;
  }
  return normalize_vector(std::move(acc));
}

std::shared_ptr<const std::vector<TextRegion>> MockEncoder::layout_for(
    const PageRef& page) const {
  std::lock_guard lock(mu_);
  if (auto it = by_page_id_.find(page.page_id); it != by_page_id_.end()) return it->second;
  if (page.image_locator.empty()) return nullptr;
  if (auto it = sidecars_.find(page.image_locator); it != sidecars_.end()) return it->second;
  std::shared_ptr<const std::vector<TextRegion>> layout;
  const std::string path = region_sidecar_path(resolve_locator(page.image_locator));
  if (std::filesystem::exists(path)) {
    layout = std::make_shared<const std::vector<TextRegion>>(load_region_sidecar(path));
  }
  sidecars_[page.image_locator] = layout;
  return layout;
}

EmbeddingVector MockEncoder::embed_crop(const CropRegion& region) const {
  if (const auto layout = layout_for(region.page)) {
    return mock_encode_image(*layout, region.box, dimension_);
  }
  return EncoderProvider::embed_crop(region);
}

std::string region_sidecar_path(const std::string& image_locator) {
  return image_locator + ".regions.json";
}

std::vector<TextRegion> load_region_sidecar(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open region layout " + path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("regions") ||
      !j.at("regions").is_array()) {
    fail(ErrorCode::kSchemaError, "region layout " + path + " must hold a regions array");
  }
  std::vector<TextRegion> regions;
  for (const auto& r : j.at("regions")) {
    if (!r.is_object() || !r.contains("box") || !r.contains("text") || !r.at("box").is_array() ||
        r.at("box").size() != 4 || !r.at("text").is_string()) {
      fail(ErrorCode::kSchemaError, "malformed region in " + path);
    }
    const auto& b = r.at("box");
    for (const auto& c : b) {
      if (!c.is_number()) fail(ErrorCode::kSchemaError, "non-numeric region box in " + path);
    }
    regions.push_back({make_box(b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                b[3].get<double>()),
                       r.at("text").get<std::string>()});
  }
  return regions;
}

ScaledEncoder::ScaledEncoder(std::shared_ptr<const EncoderProvider> inner, double scale)
    : inner_(std::move(inner)), scale_(scale) {
  if (!(scale > 0.0)) fail(ErrorCode::kInvalidArgument, "scale must be positive");
}

EmbeddingVector ScaledEncoder::rescale(const EmbeddingVector& v) const {
  std::vector<double> raw(v.values().begin(), v.values().end());
  for (double& x : raw) x *= scale_;
  return normalize_vector(std::move(raw));
}

EmbeddingVector ScaledEncoder::embed_text(std::string_view text) const {
  return rescale(inner_->embed_text(text));
}

EmbeddingVector ScaledEncoder::embed_image(std::span<const std::uint8_t> png_bytes) const {
  return rescale(inner_->embed_image(png_bytes));
}

EmbeddingVector ScaledEncoder::embed_crop(const CropRegion& region) const {
  return rescale(inner_->embed_crop(region));
}

std::shared_ptr<EncoderProvider> make_encoder(const std::string& spec) {
  constexpr std::string_view kMock = "mock:";
  if (spec.rfind(kMock, 0) == 0) {
    const std::string dim = spec.substr(kMock.size());
    std::size_t parsed = 0;
    unsigned long d = 0;
    try {
      d = std::stoul(dim, &parsed);
    } catch (const std::exception&) {
      parsed = 0;
    }
    if (dim.empty() || parsed != dim.size()) {
      fail(ErrorCode::kInvalidArgument, "bad mock encoder spec '" + spec + "'");
    }
    return std::make_shared<MockEncoder>(d);
  }
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    RemoteEncoderOptions options;
    options.base_url = spec;
    return std::make_shared<RemoteEncoder>(options);
  }
  fail(ErrorCode::kInvalidArgument,
       "encoder must be an http(s) URL or mock:<dim>, got '" + spec + "'");
}

}  // namespace coeforge
