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

#include "lineage/transport.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lineage/error.hpp"

namespace lineage {

using nlohmann::json;

std::string chat_request_body(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  json body = {{"model", request.model}, {"messages", messages},
               {"temperature", request.temperature}};
  return body.dump();
}

std::string chat_response_content(std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw FormatError("chat response is not JSON");
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw FormatError("chat response content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("chat response missing choices[0].message.content: ") +
                      e.what());
  }
}

SplitUrl split_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ConfigError("endpoint has no scheme: " + std::string(url));
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("endpoint scheme must be http or https: " + std::string(url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string_view::npos) {
    out.base = std::string(url);
    out.path = "/";
  } else {
    out.base = std::string(url.substr(0, path_start));
    out.path = std::string(url.substr(path_start));
  }
  if (out.base.size() <= scheme_end + 3) throw ConfigError("endpoint has no host: " + std::string(url));
  return out;
}

HttpChatTransport::HttpChatTransport(HttpChatOptions options) : options_(std::move(options)) {
  auto parts = split_url(options_.endpoint);
  base_ = std::move(parts.base);
  path_ = std::move(parts.path);
}

std::string HttpChatTransport::complete(const ChatRequest& request) {
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    const char* token = std::getenv(options_.api_key_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw TransportError("environment variable " + options_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const std::string body = chat_request_body(request);
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);

  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options_.backoff * attempt);
    ++attempts_;
    httplib::Client client(base_);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "request to " + base_ + path_ + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "endpoint returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                           res->body.substr(0, 200));
    }
    return chat_response_content(res->body);
  }
  throw TransportError(last_error + " (after " + std::to_string(options_.max_retries + 1) +
                       " attempts)");
}

}  // namespace lineage
