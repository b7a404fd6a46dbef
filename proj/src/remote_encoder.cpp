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

#include "coeforge/remote_encoder.hpp"

#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "coeforge/error.hpp"

namespace coeforge {
namespace {

class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

[[noreturn]] void unavailable(const std::string& why) {
  fail(ErrorCode::kProviderUnavailable, "encoder unavailable: " + why);
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) fail(ErrorCode::kDecodeError, "base64 length not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) fail(ErrorCode::kDecodeError, "invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

RemoteEncoder::RemoteEncoder(RemoteEncoderOptions options)
    : options_(std::move(options)),
      dimension_(options_.dimension),
      in_flight_(std::clamp<std::ptrdiff_t>(options_.max_in_flight, 1, 1024)) {
  const auto& url = options_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::kInvalidArgument, "encoder URL lacks a scheme: " + url);
  }
  const auto path_begin = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_begin);
  std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/v1/embed";
}

std::size_t RemoteEncoder::dimension() const {
  if (const auto d = dimension_.load(); d != 0) return d;
  return request({{"kind", "text"}, {"text", "dimension probe"}}).dimension();
}

EmbeddingVector RemoteEncoder::embed_text(std::string_view text) const {
  return request({{"kind", "text"}, {"text", std::string(text)}});
}

EmbeddingVector RemoteEncoder::embed_image(std::span<const std::uint8_t> png_bytes) const {
  return request({{"kind", "image"}, {"image_b64", base64_encode(png_bytes)}});
}

EmbeddingVector RemoteEncoder::request(const nlohmann::json& body) const {
  const std::string payload = body.dump();
  auto backoff = options_.backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      InFlightSlot slot(in_flight_);
      return request_once(payload);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kProviderUnavailable || attempt >= options_.retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

EmbeddingVector RemoteEncoder::request_once(const std::string& payload) const {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto res = client.Post(path_, payload, "application/json");
  if (!res) unavailable(httplib::to_string(res.error()));
  if (res->status != 200) unavailable("HTTP status " + std::to_string(res->status));

  const auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("vector") ||
      !reply.contains("dim") || !reply.at("vector").is_array() ||
      !reply.at("dim").is_number_integer()) {
    unavailable("malformed reply body");
  }
  const auto dim = reply.at("dim").get<long long>();
  const auto& vec = reply.at("vector");
  if (dim <= 0 || static_cast<std::size_t>(dim) != vec.size()) {
    unavailable("reply dim does not match vector length");
  }
  std::size_t expected = dimension_.load();
  if (expected == 0) {
    dimension_.compare_exchange_strong(expected, static_cast<std::size_t>(dim));
    expected = dimension_.load();
  }
  if (expected != static_cast<std::size_t>(dim)) {
    unavailable("reply dim " + std::to_string(dim) + " differs from provider dimension " +
                std::to_string(expected));
  }
  std::vector<double> values;
  values.reserve(vec.size());
  for (const auto& x : vec) {
    if (!x.is_number()) unavailable("non-numeric vector component");
    values.push_back(x.get<double>());
  }
  return normalize_vector(std::move(values));
}

}  // namespace coeforge
