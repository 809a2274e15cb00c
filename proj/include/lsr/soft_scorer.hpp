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

// Soft-constraint scoring contract.
//
// A SoftScorer maps (response, constraint description) to a score in [0, 1].
// Implementations must be safe for concurrent calls. Anything that prevents
// producing a score throws ScoringUnavailable; a failure is never reported
// as a low score.
//
// Wire protocol of the HTTP scorer:
//   POST <endpoint>/score   {"response": str, "constraint": str}
//   200                     {"score": float}
// Any other status is an error.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/error.hpp"

namespace lsr {

struct SoftScoreRequest {
  std::string response;
  std::string constraint_description;
};

struct SoftScoreResult {
  double score = 0.0;
  int satisfied = 0;
};

class SoftScorer {
 public:
  virtual ~SoftScorer() = default;
  // Returns a score in [0, 1]; throws ScoringUnavailable.
  virtual double score(const SoftScoreRequest& request) const = 0;
};

// Scores and applies the binarization threshold. Throws Error(kInvalidArgument)
// for empty request fields.
SoftScoreResult score_soft(const SoftScorer& scorer, const SoftScoreRequest& request,
                           double threshold = 0.5);

struct HttpScorerOptions {
  std::string endpoint;  // e.g. http://127.0.0.1:8080 ; "/score" is appended
  std::chrono::milliseconds timeout{10000};
  int retries = 3;  // extra attempts after the first
  std::chrono::milliseconds backoff{100};  // doubles per retry
  std::size_t max_in_flight = 8;
};

// Reads SOFT_SCORER_URL; empty when unset.
std::string soft_scorer_url_from_env();

class HttpSoftScorer final : public SoftScorer {
 public:
  explicit HttpSoftScorer(HttpScorerOptions options);
  ~HttpSoftScorer() override;

  double score(const SoftScoreRequest& request) const override;

  // Total HTTP attempts issued, including retries.
  std::size_t attempts() const { return attempts_.load(); }
  const HttpScorerOptions& options() const { return options_; }

 private:
  struct Connection;
  std::unique_ptr<Connection> acquire() const;
  void release(std::unique_ptr<Connection> connection) const;

  HttpScorerOptions options_;
  std::string host_;  // scheme://host:port
  std::string path_;  // .../score
  mutable std::mutex mutex_;
  mutable std::condition_variable slot_free_;
  mutable std::size_t in_flight_ = 0;
  mutable std::vector<std::unique_ptr<Connection>> idle_;
  mutable std::atomic<std::size_t> attempts_{0};
};

// Deterministic in-process scorer. A rule applies when the constraint
// description contains `constraint`; the first applicable rule decides the
// score (1.0 when its pattern matches the response, else 0.0). Requests
// no rule applies to score 0.0.
class MockSoftScorer final : public SoftScorer {
 public:
  struct Rule {
    enum class Match { kContains, kRegex };
    std::string constraint;
    Match match = Match::kContains;
    std::string pattern;
  };

  // Throws Error(kInvalidArgument) for an invalid regex.
  explicit MockSoftScorer(std::vector<Rule> rules);

  // JSON array of {"constraint": str, "contains": str} or
  // {"constraint": str, "regex": str}.
  static std::vector<Rule> rules_from_json(std::string_view json_text);

  double score(const SoftScoreRequest& request) const override;

  std::size_t calls() const { return calls_.load(); }

 private:
  std::vector<Rule> rules_;
  std::vector<std::regex> compiled_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace lsr
