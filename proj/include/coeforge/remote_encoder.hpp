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

// HTTP client for a remote embedding service.
//
//   POST <base>/v1/embed
//   {"kind": "text", "text": "..."} | {"kind": "image", "image_b64": "<png base64>"}
//   -> 200 {"vector": [float...], "dim": int}
//
// Non-200 replies, malformed bodies and dimension mismatches raise
// ProviderUnavailable after one retry with exponential backoff.

#include <atomic>
#include <chrono>
#include <semaphore>
#include <string>

#include <json.hpp>

#include "coeforge/embedding.hpp"

namespace coeforge {

struct RemoteEncoderOptions {
  std::string base_url;               // e.g. http://127.0.0.1:8080
  std::size_t dimension = 0;          // 0: learned from the first reply
  std::chrono::milliseconds timeout{30000};
  int retries = 1;
  std::chrono::milliseconds backoff{200};  // doubled per retry
  std::ptrdiff_t max_in_flight = 8;
};

class RemoteEncoder : public EncoderProvider {
 public:
  explicit RemoteEncoder(RemoteEncoderOptions options);

  // Probes the server with a text request when the dimension is unknown.
  std::size_t dimension() const override;
  EmbeddingVector embed_text(std::string_view text) const override;
  EmbeddingVector embed_image(std::span<const std::uint8_t> png_bytes) const override;

  const RemoteEncoderOptions& options() const noexcept { return options_; }

 private:
  EmbeddingVector request(const nlohmann::json& body) const;
  EmbeddingVector request_once(const std::string& payload) const;

  RemoteEncoderOptions options_;
  std::string scheme_host_port_;
  std::string path_;
  mutable std::atomic<std::size_t> dimension_;
  mutable std::counting_semaphore<1024> in_flight_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace coeforge
