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

#include "lsr/chat_client.hpp"

#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "url.hpp"

namespace lsr {

using nlohmann::json;

namespace {
std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value ? std::string(value) : std::string();
}
}  // namespace

ChatClientOptions ChatClientOptions::from_env() {
  ChatClientOptions options;
  options.api_base = env_or_empty("LLM_API_BASE");
  options.api_key = env_or_empty("LLM_API_KEY");
  options.model = env_or_empty("LLM_MODEL");
  return options;
}

HttpChatClient::HttpChatClient(ChatClientOptions options) : options_(std::move(options)) {
  if (options_.model.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "chat client needs a model name (LLM_MODEL)");
  }
  const detail::SplitUrl url = detail::split_url(options_.api_base, "/chat/completions");
  origin_ = url.origin;
  path_ = url.path;
}

std::string HttpChatClient::complete(const std::string& prompt) const {
  const std::string body = json{{"model", options_.model},
                                {"temperature", options_.temperature},
                                {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}}
                               .dump();
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  std::string last_error;
  auto backoff = options_.backoff;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(origin_);
    client.set_connection_timeout(seconds.count());
    client.set_read_timeout(seconds.count());
    auto result = client.Post(path_, headers, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status != 200) {
      last_error = "HTTP status " + std::to_string(result->status);
      if (result->status >= 500 || result->status == 429) continue;
      break;
    }
    json reply = json::parse(result->body, nullptr, false);
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw Error(ErrorCode::kIo, "chat completion reply has no choices[0].message.content");
    }
  }
  throw Error(ErrorCode::kIo, "chat completion at " + origin_ + path_ + " failed: " + last_error);
}

}  // namespace lsr
