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

// A chat-completion endpoint on 127.0.0.1 for transport tests.

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace lineage::testing {

struct ReceivedRequest {
  std::string body;
  std::string authorization;
};

class LocalChatServer {
 public:
  /// `handler` maps the 1-based attempt number to (status, reply content).
  using Handler = std::function<std::pair<int, std::string>(int attempt)>;

  explicit LocalChatServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int attempt = ++attempts_;
      {
        std::lock_guard lock(mu_);
        received_.push_back({req.body, req.get_header_value("Authorization")});
      }
      auto [status, content] = handler_(attempt);
      res.status = status;
      if (status == 200) {
        nlohmann::json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
        res.set_content(body.dump(), "application/json");
      } else {
        res.set_content(content, "text/plain");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~LocalChatServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  int attempts() const { return attempts_.load(); }
  std::vector<ReceivedRequest> received() const {
    std::lock_guard lock(mu_);
    return received_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> attempts_{0};
  mutable std::mutex mu_;
  std::vector<ReceivedRequest> received_;
};

}  // namespace lineage::testing
