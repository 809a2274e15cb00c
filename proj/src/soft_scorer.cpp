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

#include "lsr/soft_scorer.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "url.hpp"

namespace lsr {

using nlohmann::json;

SoftScoreResult score_soft(const SoftScorer& scorer, const SoftScoreRequest& request,
                           double threshold) {
  if (request.response.empty() || request.constraint_description.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "soft score request needs a non-empty response and constraint description");
  }
  const double score = scorer.score(request);
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ScoringUnavailable("scorer returned an out-of-range score " + std::to_string(score));
  }
  return SoftScoreResult{score, score >= threshold ? 1 : 0};
}

std::string soft_scorer_url_from_env() {
  const char* url = std::getenv("SOFT_SCORER_URL");
  return url ? std::string(url) : std::string();
}

// ---------------------------------------------------------------------------

struct HttpSoftScorer::Connection {
  explicit Connection(const std::string& host, std::chrono::milliseconds timeout) : client(host) {
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    client.set_keep_alive(true);
  }
  httplib::Client client;
};

HttpSoftScorer::HttpSoftScorer(HttpScorerOptions options) : options_(std::move(options)) {
  const detail::SplitUrl url = detail::split_url(options_.endpoint, "/score");
  host_ = url.origin;
  path_ = url.path;
  if (options_.retries < 0) throw Error(ErrorCode::kInvalidArgument, "retries must be >= 0");
  if (options_.timeout.count() <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "soft scorer timeout must be positive");
  }
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

HttpSoftScorer::~HttpSoftScorer() = default;

std::unique_ptr<HttpSoftScorer::Connection> HttpSoftScorer::acquire() const {
  std::unique_lock lock(mutex_);
  slot_free_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
  ++in_flight_;
  if (!idle_.empty()) {
    auto connection = std::move(idle_.back());
    idle_.pop_back();
    return connection;
  }
  lock.unlock();
  return std::make_unique<Connection>(host_, options_.timeout);
}

void HttpSoftScorer::release(std::unique_ptr<Connection> connection) const {
  {
    std::lock_guard lock(mutex_);
    if (connection) idle_.push_back(std::move(connection));
    --in_flight_;
  }
  slot_free_.notify_one();
}

double HttpSoftScorer::score(const SoftScoreRequest& request) const {
  const std::string body =
      json{{"response", request.response}, {"constraint", request.constraint_description}}.dump();
  std::string last_error;
  auto backoff = options_.backoff;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0 && backoff.count() > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto connection = acquire();
    ++attempts_;
    httplib::Result result = connection->client.Post(path_, body, "application/json");
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      release(nullptr);  // drop a connection in an unknown state
      continue;
    }
    const int status = result->status;
    std::string reply = std::move(result->body);
    release(std::move(connection));
    if (status != 200) {
      last_error = "HTTP status " + std::to_string(status);
      if (status >= 500 || status == 429) continue;
      throw ScoringUnavailable("soft scorer at " + host_ + path_ + ": " + last_error);
    }
    json parsed = json::parse(reply, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("score") ||
        !parsed["score"].is_number()) {
      throw ScoringUnavailable("soft scorer at " + host_ + path_ +
                               ": malformed reply, expected {\"score\": number}");
    }
    const double score = parsed["score"].get<double>();
    if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
      throw ScoringUnavailable("soft scorer at " + host_ + path_ + ": score " +
                               std::to_string(score) + " outside [0, 1]");
    }
    return score;
  }
  throw ScoringUnavailable("soft scorer at " + host_ + path_ + " unavailable after " +
                           std::to_string(options_.retries + 1) + " attempts (" + last_error + ")");
}

// ---------------------------------------------------------------------------

MockSoftScorer::MockSoftScorer(std::vector<Rule> rules) : rules_(std::move(rules)) {
  compiled_.reserve(rules_.size());
  for (const Rule& rule : rules_) {
    if (rule.match == Rule::Match::kRegex) {
      try {
        compiled_.emplace_back(rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::kInvalidArgument,
                    "invalid mock rule pattern '" + rule.pattern + "': " + e.what());
      }
    } else {
      compiled_.emplace_back();
    }
  }
}

std::vector<MockSoftScorer::Rule> MockSoftScorer::rules_from_json(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "mock rules must be a JSON array");
  }
  std::vector<Rule> rules;
  for (const json& entry : doc) {
    if (!entry.is_object() || !entry.contains("constraint") || !entry["constraint"].is_string()) {
      throw Error(ErrorCode::kInvalidArgument, "each mock rule needs a \"constraint\" string");
    }
    Rule rule;
    rule.constraint = entry["constraint"].get<std::string>();
    if (entry.contains("contains") && entry["contains"].is_string()) {
      rule.pattern = entry["contains"].get<std::string>();
    } else if (entry.contains("regex") && entry["regex"].is_string()) {
      rule.match = Rule::Match::kRegex;
      rule.pattern = entry["regex"].get<std::string>();
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "mock rule for '" + rule.constraint + "' needs \"contains\" or \"regex\"");
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

double MockSoftScorer::score(const SoftScoreRequest& request) const {
  ++calls_;
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const Rule& rule = rules_[i];
    if (request.constraint_description.find(rule.constraint) == std::string::npos) continue;
    const bool hit = rule.match == Rule::Match::kContains
                         ? request.response.find(rule.pattern) != std::string::npos
                         : std::regex_search(request.response, compiled_[i]);
    return hit ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace lsr
