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
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coeforge/core.hpp"
#include "coeforge/geometry.hpp"

namespace coeforge {

// Unit-norm vector. Only normalize_vector() constructs one.
class EmbeddingVector {
 public:
  std::size_t dimension() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  friend EmbeddingVector normalize_vector(std::vector<double> raw);
  explicit EmbeddingVector(std::vector<double> v) : values_(std::move(v)) {}
  std::vector<double> values_;
};

// L2 normalization. Throws ZeroVector for an all-zero (or empty) input.
EmbeddingVector normalize_vector(std::vector<double> raw);

// Dot product of unit vectors, clamped to [-1, 1]. Throws DimensionMismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

// Encoder contract. Implementations are deterministic per instance and safe to
// call from several threads at once.
class EncoderProvider {
 public:
  virtual ~EncoderProvider() = default;

  virtual std::size_t dimension() const = 0;
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;
  virtual EmbeddingVector embed_image(std::span<const std::uint8_t> png_bytes) const = 0;

  // Embedding of a page crop. The default decodes the page, materializes the
  // crop as PNG and forwards to embed_image().
  virtual EmbeddingVector embed_crop(const CropRegion& region) const;
};

// 64-bit FNV-1a; the bucket/sign hash of the mock encoder.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

struct WeightedText {
  std::string text;
  double weight = 1.0;
};

// Hashed bag of words: each normalized token lands in bucket h % d with sign
// from bit 63 of h; token counts are multiplied by the text weight.
// Throws InvalidArgument for d < 8, ZeroVector when nothing accumulates.
EmbeddingVector mock_encode_weighted(std::span<const WeightedText> texts, std::size_t d);
EmbeddingVector mock_encode_text(std::string_view text, std::size_t d);

struct TextRegion {
  BoundingBox box;
  std::string text;

  friend bool operator==(const TextRegion&, const TextRegion&) = default;
};

// Text regions in the crop, each weighted by the fraction of its area inside.
std::vector<WeightedText> regions_in_crop(std::span<const TextRegion> regions,
                                          const BoundingBox& crop);

// Mock image embedding of a crop over a page with known text regions.
EmbeddingVector mock_encode_image(std::span<const TextRegion> regions, const BoundingBox& crop,
                                  std::size_t d);

// Deterministic offline encoder. Crops of pages with a registered text layout
// (or a "<image>.regions.json" sidecar) embed the text lying inside the crop;
// other images embed a hash of their bytes.
class MockEncoder : public EncoderProvider {
 public:
  explicit MockEncoder(std::size_t dimension);

  void register_layout(const std::string& page_id, std::vector<TextRegion> regions);

  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed_text(std::string_view text) const override;
  EmbeddingVector embed_image(std::span<const std::uint8_t> png_bytes) const override;
  EmbeddingVector embed_crop(const CropRegion& region) const override;

 private:
  std::shared_ptr<const std::vector<TextRegion>> layout_for(const PageRef& page) const;

  std::size_t dimension_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const std::vector<TextRegion>>> by_page_id_;
  mutable std::map<std::string, std::shared_ptr<const std::vector<TextRegion>>> sidecars_;
};

// Reads a "<image>.regions.json" layout: {"regions": [{"box": [..], "text": ".."}]}.
std::vector<TextRegion> load_region_sidecar(const std::string& path);
std::string region_sidecar_path(const std::string& image_locator);

// Multiplies every raw vector by a positive constant before normalization;
// used to check that reward indicators are scale invariant.
class ScaledEncoder : public EncoderProvider {
 public:
  ScaledEncoder(std::shared_ptr<const EncoderProvider> inner, double scale);

  std::size_t dimension() const override { return inner_->dimension(); }
  EmbeddingVector embed_text(std::string_view text) const override;
  EmbeddingVector embed_image(std::span<const std::uint8_t> png_bytes) const override;
  EmbeddingVector embed_crop(const CropRegion& region) const override;

 private:
  EmbeddingVector rescale(const EmbeddingVector& v) const;

  std::shared_ptr<const EncoderProvider> inner_;
  double scale_;
};

// Parses "mock:<dim>" or an http(s) URL into a provider.
std::shared_ptr<EncoderProvider> make_encoder(const std::string& spec);

}  // namespace coeforge
