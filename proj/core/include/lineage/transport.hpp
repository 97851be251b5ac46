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

#pragma once

// Chat-completion client used by remote detectors, planners and reflectors.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lineage {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
};

/// Sends one request and returns the text of the first choice. Implementations
/// throw TransportError for retriable failures and FormatError when the
/// response body has the wrong shape.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// {"model": ..., "messages": [{"role", "content"}...], "temperature": ...}
std::string chat_request_body(const ChatRequest& request);
/// Reads choices[0].message.content.
std::string chat_response_content(std::string_view body);

struct HttpChatOptions {
  std::string endpoint;     // http(s)://host[:port]/path
  std::string api_key_env;  // environment variable holding the bearer token
  std::chrono::milliseconds timeout{30000};
  int max_retries = 2;  // attempts after the first one
  std::chrono::milliseconds backoff{200};
};

class HttpChatTransport : public ChatTransport {
 public:
  explicit HttpChatTransport(HttpChatOptions options);
  std::string complete(const ChatRequest& request) override;
  std::uint64_t attempts() const { return attempts_.load(); }

 private:
  HttpChatOptions options_;
  std::string base_;  // scheme://host:port
  std::string path_;
  std::atomic<std::uint64_t> attempts_{0};
};

struct SplitUrl {
  std::string base;
  std::string path;
};
/// Splits an endpoint URL into its origin and path. Throws ConfigError on
/// anything other than http or https.
SplitUrl split_url(std::string_view url);

}  // namespace lineage
