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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "lsr/soft_scorer.hpp"
#include "support/errors.hpp"

namespace lsr {
namespace {

using nlohmann::json;
using testing::code_of;
using testing::message_of;

// A scorer service on an ephemeral port. The handler sees the 1-based index
// of each request and fills the response.
class FakeService {
 public:
  using Handler = std::function<void(int, const json&, httplib::Response&)>;

  explicit FakeService(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      handler_(++requests_, json::parse(req.body, nullptr, false), res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int requests() const { return requests_.load(); }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
};

HttpScorerOptions fast_options(const std::string& url) {
  HttpScorerOptions options;
  options.endpoint = url;
  options.timeout = std::chrono::milliseconds(2000);
  options.backoff = std::chrono::milliseconds(1);
  options.retries = 3;
  return options;
}

const SoftScoreRequest kRequest{"I am so happy today!", "Respond in a cheerful tone"};

TEST_CASE("http scorer posts response and constraint") {
  json seen;
  FakeService service([&](int, const json& body, httplib::Response& res) {
    seen = body;
    res.set_content(R"({"score": 0.8})", "application/json");
  });
  const HttpSoftScorer scorer(fast_options(service.url()));
  CHECK(scorer.score(kRequest) == 0.8);
  CHECK(seen["response"] == kRequest.response);
  CHECK(seen["constraint"] == kRequest.constraint_description);
  CHECK(scorer.attempts() == 1);
}

TEST_CASE("server errors are retried with a bounded attempt count") {
  SUBCASE("recovers after transient failures") {
    FakeService service([](int n, const json&, httplib::Response& res) {
      if (n <= 2) {
        res.status = n == 1 ? 503 : 429;
        return;
      }
      res.set_content(R"({"score": 0.25})", "application/json");
    });
    const HttpSoftScorer scorer(fast_options(service.url()));
    CHECK(scorer.score(kRequest) == 0.25);
    CHECK(scorer.attempts() == 3);
  }
  SUBCASE("gives up after retries + 1 attempts") {
    FakeService service([](int, const json&, httplib::Response& res) { res.status = 500; });
    const HttpSoftScorer scorer(fast_options(service.url()));
    const std::string msg = message_of([&] { scorer.score(kRequest); });
    CHECK(code_of([&] { scorer.score(kRequest); }) == ErrorCode::kScoringUnavailable);
    CHECK(msg.find("after 4 attempts") != std::string::npos);
    CHECK(service.requests() == 8);
  }
  SUBCASE("client errors fail immediately") {
    FakeService service([](int, const json&, httplib::Response& res) { res.status = 400; });
    const HttpSoftScorer scorer(fast_options(service.url()));
    CHECK(code_of([&] { scorer.score(kRequest); }) == ErrorCode::kScoringUnavailable);
    CHECK(scorer.attempts() == 1);
  }
}

TEST_CASE("malformed replies are errors, never a zero score") {
  for (const char* body : {"not json", R"({"value": 1})", R"({"score": "high"})", R"({"score": 1.5})"}) {
    CAPTURE(body);
    FakeService service([body](int, const json&, httplib::Response& res) {
      res.set_content(body, "application/json");
    });
    const HttpSoftScorer scorer(fast_options(service.url()));
    CHECK(code_of([&] { scorer.score(kRequest); }) == ErrorCode::kScoringUnavailable);
  }
}

TEST_CASE("unreachable endpoint") {
  // Reserve an ephemeral port and release it without ever listening on it.
  int port = 0;
  {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof(addr);
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    REQUIRE(::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0);
    port = ntohs(addr.sin_port);
    ::close(fd);
  }
  HttpScorerOptions options = fast_options("http://127.0.0.1:" + std::to_string(port));
  options.retries = 1;
  const HttpSoftScorer scorer(options);
  CHECK(code_of([&] { scorer.score(kRequest); }) == ErrorCode::kScoringUnavailable);
  CHECK(scorer.attempts() == 2);
}

TEST_CASE("endpoint validation") {
  CHECK(code_of([] { HttpSoftScorer(fast_options("")); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { HttpSoftScorer(fast_options("ftp://host")); }) == ErrorCode::kInvalidArgument);
  HttpScorerOptions bad = fast_options("http://127.0.0.1:1");
  bad.retries = -1;
  CHECK(code_of([&] { HttpSoftScorer{bad}; }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("score_soft binarizes at the threshold") {
  const MockSoftScorer scorer({{"cheerful", MockSoftScorer::Rule::Match::kContains, "happy"}});
  CHECK(score_soft(scorer, kRequest).satisfied == 1);
  CHECK(score_soft(scorer, {"I am sad.", kRequest.constraint_description}).satisfied == 0);
  CHECK(code_of([&] { score_soft(scorer, {"", "x"}); }) == ErrorCode::kInvalidArgument);

  struct Fixed final : SoftScorer {
    double value;
    explicit Fixed(double v) : value(v) {}
    double score(const SoftScoreRequest&) const override { return value; }
  };
  CHECK(score_soft(Fixed(0.5), kRequest).satisfied == 1);
  CHECK(score_soft(Fixed(0.4999), kRequest).satisfied == 0);
  CHECK(score_soft(Fixed(0.7), kRequest, 0.8).satisfied == 0);
  CHECK(code_of([&] { score_soft(Fixed(-0.1), kRequest); }) == ErrorCode::kScoringUnavailable);
}

TEST_CASE("mock rules") {
  const auto rules = MockSoftScorer::rules_from_json(
      R"([{"constraint":"formal","regex":"^Dear "},{"constraint":"cheerful","contains":"!"}])");
  const MockSoftScorer scorer(rules);
  CHECK(scorer.score({"Dear Sir, ...", "Use a formal register"}) == 1.0);
  CHECK(scorer.score({"Hey there", "Use a formal register"}) == 0.0);
  CHECK(scorer.score({"Yay!", "Be cheerful"}) == 1.0);
  CHECK(scorer.score({"Yay!", "Be concise"}) == 0.0);
  CHECK(scorer.calls() == 4);
  CHECK(code_of([] { MockSoftScorer::rules_from_json("{}"); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { MockSoftScorer::rules_from_json(R"([{"constraint":"x"}])"); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] {
          MockSoftScorer(MockSoftScorer::rules_from_json(R"([{"constraint":"x","regex":"("}])"));
        }) == ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace lsr
