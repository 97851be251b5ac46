// Copyright 2026 The Lineage Authors.
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

#include "lineage/error.hpp"
#include "lineage/transport.hpp"
#include "local_server.hpp"

namespace lineage {
namespace {

using testing::LocalChatServer;

ChatRequest hello() {
  ChatRequest r;
  r.model = "judge-1";
  r.temperature = 0.25;
  r.messages = {{"user", "hello"}};
  return r;
}

HttpChatOptions fast(const std::string& endpoint) {
  HttpChatOptions o;
  o.endpoint = endpoint;
  o.timeout = std::chrono::milliseconds(2000);
  o.backoff = std::chrono::milliseconds(1);
  return o;
}

TEST(ChatWire, RequestShape) {
  const auto j = nlohmann::json::parse(chat_request_body(hello()));
  EXPECT_EQ(j.at("model"), "judge-1");
  EXPECT_DOUBLE_EQ(j.at("temperature").get<double>(), 0.25);
  ASSERT_EQ(j.at("messages").size(), 1u);
  EXPECT_EQ(j.at("messages")[0].at("role"), "user");
  EXPECT_EQ(j.at("messages")[0].at("content"), "hello");
}

TEST(ChatWire, ResponseShape) {
  EXPECT_EQ(chat_response_content(R"({"choices": [{"message": {"content": "hi"}}]})"), "hi");
  EXPECT_THROW(chat_response_content("nope"), FormatError);
  EXPECT_THROW(chat_response_content(R"({"choices": []})"), FormatError);
  EXPECT_THROW(chat_response_content(R"({"choices": [{"message": {"content": 3}}]})"), FormatError);
}

TEST(SplitUrl, Forms) {
  auto u = split_url("https://api.example.com/v1/chat/completions");
  EXPECT_EQ(u.base, "https://api.example.com");
  EXPECT_EQ(u.path, "/v1/chat/completions");
  u = split_url("http://127.0.0.1:8080");
  EXPECT_EQ(u.base, "http://127.0.0.1:8080");
  EXPECT_EQ(u.path, "/");
  EXPECT_THROW(split_url("ftp://x/y"), ConfigError);
  EXPECT_THROW(split_url("localhost/x"), ConfigError);
  EXPECT_THROW(split_url("http:///x"), ConfigError);
}

TEST(HttpTransport, RoundTripWithBearerToken) {
  LocalChatServer server([](int) { return std::pair{200, std::string("verdict")}; });
  ::setenv("LINEAGE_TEST_TOKEN", "s3cret", 1);
  auto opts = fast(server.endpoint());
  opts.api_key_env = "LINEAGE_TEST_TOKEN";
  HttpChatTransport t(opts);
  EXPECT_EQ(t.complete(hello()), "verdict");
  const auto got = server.received();
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].authorization, "Bearer s3cret");
  EXPECT_EQ(nlohmann::json::parse(got[0].body), nlohmann::json::parse(chat_request_body(hello())));
}

TEST(HttpTransport, MissingTokenFailsWithoutSending) {
  LocalChatServer server([](int) { return std::pair{200, std::string("x")}; });
  ::unsetenv("LINEAGE_TEST_ABSENT");
  auto opts = fast(server.endpoint());
  opts.api_key_env = "LINEAGE_TEST_ABSENT";
  HttpChatTransport t(opts);
  EXPECT_THROW(t.complete(hello()), TransportError);
  EXPECT_EQ(server.attempts(), 0);
}

TEST(HttpTransport, RetriesServerErrors) {
  LocalChatServer server([](int attempt) {
    return attempt < 3 ? std::pair{503, std::string("busy")} : std::pair{200, std::string("ok")};
  });
  auto opts = fast(server.endpoint());
  opts.max_retries = 2;
  HttpChatTransport t(opts);
  EXPECT_EQ(t.complete(hello()), "ok");
  EXPECT_EQ(server.attempts(), 3);
}

TEST(HttpTransport, BoundedRetriesSurfaceLastError) {
  LocalChatServer server([](int) { return std::pair{500, std::string("down")}; });
  auto opts = fast(server.endpoint());
  opts.max_retries = 3;
  HttpChatTransport t(opts);
  try {
    t.complete(hello());
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("HTTP 500"), std::string::npos);
  }
  EXPECT_EQ(server.attempts(), 4);
  EXPECT_EQ(t.attempts(), 4u);
}

TEST(HttpTransport, ClientErrorsAreNotRetried) {
  LocalChatServer server([](int) { return std::pair{401, std::string("bad key")}; });
  HttpChatTransport t(fast(server.endpoint()));
  EXPECT_THROW(t.complete(hello()), TransportError);
  EXPECT_EQ(server.attempts(), 1);
}

TEST(HttpTransport, DeadEndpoint) {
  std::string endpoint;
  {
    LocalChatServer server([](int) { return std::pair{200, std::string("x")}; });
    endpoint = server.endpoint();
  }
  auto opts = fast(endpoint);
  opts.max_retries = 1;
  HttpChatTransport t(opts);
  EXPECT_THROW(t.complete(hello()), TransportError);
  EXPECT_EQ(t.attempts(), 2u);
}

}  // namespace
}  // namespace lineage
