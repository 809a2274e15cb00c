// Copyright 2026 The lsreward Authors
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

#include <chrono>
#include <string>

#include "lsr/error.hpp"

namespace lsr {

// Single-turn chat completion. Implementations must tolerate concurrent
// calls. Failures throw Error(kIo).
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& prompt) const = 0;
};

struct ChatClientOptions {
  std::string api_base;  // e.g. http://localhost:8000/v1
  std::string api_key;
  std::string model;
  double temperature = 0.7;
  std::chrono::milliseconds timeout{120000};
  int retries = 3;
  std::chrono::milliseconds backoff{500};

  // LLM_API_BASE, LLM_API_KEY, LLM_MODEL.
  static ChatClientOptions from_env();
};

// OpenAI-compatible POST <api_base>/chat/completions.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ChatClientOptions options);
  std::string complete(const std::string& prompt) const override;

 private:
  ChatClientOptions options_;
  std::string origin_;
  std::string path_;
};

}  // namespace lsr
