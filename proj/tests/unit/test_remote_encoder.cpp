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

#include <atomic>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

#include "coeforge/embedding.hpp"
#include "coeforge/error.hpp"
#include "coeforge/imaging.hpp"
#include "coeforge/remote_encoder.hpp"

namespace coeforge {
namespace {

// A loopback port with no listener: bind an ephemeral port, then close it.
int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

using json = nlohmann::json;
using namespace std::chrono_literals;

// Embedding server stub: text requests map to the mock encoder, image requests
// must carry a decodable PNG.
class StubServer {
 public:
  explicit StubServer(std::size_t dim = 16) : dim_(dim) {
    server_.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      const int now = ++in_flight_;
      int seen = max_in_flight_.load();
      while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
      }
      if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
      --in_flight_;
      if (fail_first_ > 0) {
        --fail_first_;
        res.status = 503;
        return;
      }
      const auto body = json::parse(req.body);
      std::vector<double> v;
      if (body.at("kind") == "text") {
        const auto e = mock_encode_text(body.at("text").get<std::string>(), dim_);
        v.assign(e.values().begin(), e.values().end());
      } else {
        const auto png = base64_decode(body.at("image_b64").get<std::string>());
        const auto img = decode_image(png);
        last_image_width_ = img.width;
        v.assign(dim_, 0.0);
        v[0] = 2.0;
      }
      std::size_t reported = reported_dim_ ? reported_dim_ : v.size();
      res.set_content(json{{"vector", v}, {"dim", reported}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::atomic<int> fail_first_{0};
  std::atomic<int> last_image_width_{0};
  std::chrono::milliseconds delay_{0};
  std::size_t reported_dim_ = 0;

 private:
  std::size_t dim_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RemoteEncoderOptions fast(const std::string& url) {
  RemoteEncoderOptions o;
  o.base_url = url;
  o.timeout = 2000ms;
  o.backoff = 10ms;
  return o;
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

TEST(Base64, RoundTrip) {
  for (std::size_t n = 0; n < 20; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(i * 37 + 1);
    EXPECT_EQ(base64_decode(base64_encode(bytes)), bytes);
  }
  const std::string hello = "hello";
  EXPECT_EQ(base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(hello.data()), hello.size())),
            "aGVsbG8=");
  EXPECT_EQ(code_of([] { base64_decode("abc"); }), ErrorCode::kDecodeError);
}

TEST(RemoteEncoderTest, TextRequestsMatchServerVectors) {
  StubServer server;
  RemoteEncoder enc(fast(server.url()));
  EXPECT_EQ(enc.dimension(), 16u);
  const auto v = enc.embed_text("net revenue");
  const auto expected = mock_encode_text("net revenue", 16);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(v.values()[i], expected.values()[i], 1e-15);
  EXPECT_EQ(enc.embed_text("net revenue"), v);
}

TEST(RemoteEncoderTest, ImageRequestsCarryPng) {
  StubServer server;
  RemoteEncoder enc(fast(server.url()));
  const std::vector<std::uint8_t> rgb(7 * 3 * 3, 128);
  const auto v = enc.embed_image(encode_png(7, 3, rgb));
  EXPECT_EQ(server.last_image_width_.load(), 7);
  EXPECT_DOUBLE_EQ(v.values()[0], 1.0);
}

TEST(RemoteEncoderTest, BasePathPrefixIsKept) {
  StubServer server;
  RemoteEncoder enc(fast(server.url() + "/"));
  EXPECT_NO_THROW(enc.embed_text("x"));
}

TEST(RemoteEncoderTest, RetriesOnceThenSucceeds) {
  StubServer server;
  server.fail_first_ = 1;
  RemoteEncoder enc(fast(server.url()));
  EXPECT_NO_THROW(enc.embed_text("x"));
  EXPECT_EQ(server.requests_.load(), 2);
}

TEST(RemoteEncoderTest, GivesUpAfterOneRetry) {
  StubServer server;
  server.fail_first_ = 5;
  RemoteEncoder enc(fast(server.url()));
  EXPECT_EQ(code_of([&] { enc.embed_text("x"); }), ErrorCode::kProviderUnavailable);
  EXPECT_EQ(server.requests_.load(), 2);
}

TEST(RemoteEncoderTest, DimensionMismatchIsUnavailable) {
  StubServer server;
  server.reported_dim_ = 17;
  auto options = fast(server.url());
  EXPECT_EQ(code_of([&] { RemoteEncoder(options).embed_text("x"); }),
            ErrorCode::kProviderUnavailable);

  StubServer other;
  options = fast(other.url());
  options.dimension = 32;
  EXPECT_EQ(code_of([&] { RemoteEncoder(options).embed_text("x"); }),
            ErrorCode::kProviderUnavailable);
}

TEST(RemoteEncoderTest, UnreachableServer) {
  const int port = closed_port();
  auto options = fast("http://127.0.0.1:" + std::to_string(port));
  options.timeout = 300ms;
  EXPECT_EQ(code_of([&] { RemoteEncoder(options).embed_text("x"); }),
            ErrorCode::kProviderUnavailable);
}

TEST(RemoteEncoderTest, TimeoutIsUnavailable) {
  StubServer server;
  server.delay_ = 600ms;
  auto options = fast(server.url());
  options.timeout = 100ms;
  options.retries = 0;
  EXPECT_EQ(code_of([&] { RemoteEncoder(options).embed_text("x"); }),
            ErrorCode::kProviderUnavailable);
}

TEST(RemoteEncoderTest, BoundsInFlightRequests) {
  StubServer server;
  server.delay_ = 30ms;
  auto options = fast(server.url());
  options.max_in_flight = 2;
  options.dimension = 16;
  RemoteEncoder enc(options);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { enc.embed_text("token" + std::to_string(i)); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(server.requests_.load(), 8);
  EXPECT_LE(server.max_in_flight_.load(), 2);
}

TEST(RemoteEncoderTest, RejectsUrlWithoutScheme) {
  RemoteEncoderOptions o;
  o.base_url = "localhost:8080";
  EXPECT_EQ(code_of([&] { RemoteEncoder enc(o); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace coeforge
