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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "lsr/reward.hpp"
#include "support/errors.hpp"
#include "support/oracles.hpp"
#include "support/random_trees.hpp"

namespace lsr {
namespace {

using nlohmann::json;
using testing::bits;
using testing::code_of;

constexpr double kGammas[] = {0.0, 0.25, 0.5, 0.9};

std::vector<double> as_doubles(const std::vector<int>& r) { return {r.begin(), r.end()}; }

LogicNode token_tree(const char* type, std::size_t n) {
  json children = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    children.push_back(testing::token_leaf("c" + std::to_string(i), testing::token_for(i)));
  }
  return parse_tree(json{{"type", type}, {"children", children}}.dump());
}

class FixedScorer final : public SoftScorer {
 public:
  explicit FixedScorer(double value) : value_(value) {}
  double score(const SoftScoreRequest&) const override { return value_; }

 private:
  double value_;
};

class FailingScorer final : public SoftScorer {
 public:
  double score(const SoftScoreRequest&) const override {
    throw ScoringUnavailable("connection refused");
  }
};

LogicNode soft_leaf(const std::string& id) {
  return LogicNode::leaf(ConstraintSpec(id, "tone_emotion", {{"description", std::string("calm")}}));
}

LogicNode hard_leaf(const std::string& id, const std::string& token) {
  return LogicNode::leaf(ConstraintSpec(id, "include_keywords",
                                        {{"keywords", std::vector<std::string>{token}}}));
}

TEST_CASE("parallel aggregation") {
  CHECK(reward_parallel(std::vector<double>{1, 0, 1}) == doctest::Approx(2.0 / 3.0));
  CHECK(reward_parallel(std::vector<double>{1, 1, 1}) == 1.0);
  for (unsigned mask = 0; mask < 16; ++mask) {
    const auto r = bits(mask, 4);
    CHECK(std::fabs(reward_parallel(as_doubles(r)) - testing::oracle_parallel_binary(r)) <= 1e-12);
  }
  CHECK(code_of([] { reward_parallel(std::vector<double>{}); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([] { reward_parallel(std::vector<double>{1.5}); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("sequential aggregation") {
  CHECK(reward_sequential(std::vector<double>{1, 0, 1}, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  for (double gamma : kGammas) CHECK(reward_sequential(std::vector<double>{1, 1, 1}, gamma) == 1.0);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      const auto r = bits(mask, n);
      for (double gamma : kGammas) {
        CHECK(std::fabs(reward_sequential(as_doubles(r), gamma) -
                        testing::oracle_sequential_binary(r, gamma)) <= 1e-12);
      }
    }
  }
  CHECK(code_of([] { reward_sequential(std::vector<double>{}, 0.5); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { reward_sequential(std::vector<double>{1}, 1.0); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(code_of([] { reward_sequential(std::vector<double>{1}, -0.1); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("sequential reward is monotone in each child") {
  int violations = 0;
  for (std::size_t n = 1; n <= 5; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) continue;
        for (double gamma : kGammas) {
          const double lo = reward_sequential(as_doubles(bits(mask, n)), gamma);
          const double hi = reward_sequential(as_doubles(bits(mask | (1u << i), n)), gamma);
          if (hi < lo) ++violations;
        }
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("conditional aggregation") {
  CHECK(reward_conditional(1, 1, 0) == 1.0);
  CHECK(reward_conditional(0, 1, 0) == 0.0);
  for (int x = 0; x <= 1; ++x) {
    for (int y = 0; y <= 1; ++y) CHECK(reward_conditional(0, x, y) == y);
  }
  RewardConfig lenient;
  lenient.trigger_threshold = 0.5;
  CHECK(reward_conditional(0.6, 0.25, 0.75, lenient) == 0.25);
  CHECK(reward_conditional(0.6, 0.25, 0.75) == 0.75);
}

TEST_CASE("config validation") {
  RewardConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.gamma = 1.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.trigger_threshold = 0.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
  cfg = {};
  cfg.soft_binarize_threshold = 1.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("score_tree on depth-1 trees matches the oracles") {
  for (std::size_t n = 1; n <= 5; ++n) {
    const LogicNode par = token_tree("par", n);
    const LogicNode seq = token_tree("seq", n);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      const auto r = bits(mask, n);
      const std::string response = testing::response_for(r);
      CHECK(std::fabs(score_tree(par, response, {}).root_reward -
                      testing::oracle_parallel_binary(r)) <= 1e-12);
      for (double gamma : kGammas) {
        RewardConfig cfg;
        cfg.gamma = gamma;
        CHECK(std::fabs(score_tree(seq, response, {}, cfg).root_reward -
                        testing::oracle_sequential_binary(r, gamma)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("worked trees") {
  SUBCASE("flat parallel (1,0,1)") {
    const LogicNode tree = token_tree("par", 3);
    CHECK(score_tree(tree, testing::response_for({1, 0, 1}), {}).root_reward ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("conditional with satisfied trigger") {
    const LogicNode tree =
        LogicNode::conditional(hard_leaf("t", "yes"), hard_leaf("a", "apple"), hard_leaf("b", "pear"));
    const EvalTrace trace = score_tree(tree, "yes apple", {});
    CHECK(trace.root_reward == 1.0);
    CHECK(trace.find("$.true")->active);
    CHECK_FALSE(trace.find("$.false")->active);
    CHECK_FALSE(trace.find("$.false")->verdict.has_value());
    CHECK(trace.find("$.trigger")->verdict == 1);
  }
  SUBCASE("nested sequential over a parallel") {
    const LogicNode tree = LogicNode::sequential(
        {LogicNode::parallel({hard_leaf("a", "alpha"), hard_leaf("b", "beta")}),
         hard_leaf("c", "gamma")});
    const EvalTrace trace = score_tree(tree, "alpha gamma", {});
    CHECK(trace.find("$.0")->reward == 0.5);
    CHECK(trace.find("$.1")->reward == 1.0);
    const double expected = (0.5 + std::sqrt(0.5)) / 2.0;
    CHECK(std::fabs(trace.root_reward - expected) <= 1e-15);
    CHECK(std::fabs(trace.root_reward - 0.6035533905932737) <= 1e-15);
  }
}

TEST_CASE("trace layout") {
  const LogicNode tree = LogicNode::parallel(
      {hard_leaf("a", "x"),
       LogicNode::conditional(hard_leaf("t", "y"), LogicNode::sequential({hard_leaf("b", "z")}),
                              hard_leaf("c", "w"))});
  const EvalTrace trace = score_tree(tree, "x w", {});
  std::vector<std::string> paths;
  for (const NodeResult& node : trace.nodes) paths.push_back(node.path);
  CHECK(paths == std::vector<std::string>{"$", "$.0", "$.1", "$.1.trigger", "$.1.true",
                                          "$.1.true.0", "$.1.false"});
  CHECK_FALSE(trace.find("$.1.true.0")->active);
  CHECK(trace.find("$.1.true.0")->reward == 0.0);
  CHECK(trace.find("$.1.false")->constraint_id == "c");
  CHECK(trace.root_reward == 1.0);
}

TEST_CASE("conditional branch isolation over depth-2 trees") {
  // Trigger, true branch and false branch are each a 2-leaf parallel or
  // sequential node; the 6 leaf verdicts are enumerated exhaustively.
  int violations = 0;
  for (const char* inner : {"par", "seq"}) {
    json branches[3];
    for (int b = 0; b < 3; ++b) {
      branches[b] = {{"type", inner},
                     {"children",
                      {testing::token_leaf("c" + std::to_string(2 * b), testing::token_for(2 * b)),
                       testing::token_leaf("c" + std::to_string(2 * b + 1),
                                           testing::token_for(2 * b + 1))}}};
    }
    const LogicNode tree = parse_tree(
        json{{"type", "cond"}, {"trigger", branches[0]}, {"true", branches[1]}, {"false", branches[2]}}
            .dump());
    for (unsigned mask = 0; mask < 64; ++mask) {
      const double base = score_tree(tree, testing::response_for(bits(mask, 6)), {}).root_reward;
      const bool trigger_on = (mask & 3u) == 3u;
      const unsigned inactive = trigger_on ? 0x30u : 0x0Cu;
      for (unsigned flip = 0; flip < 4; ++flip) {
        const unsigned shifted = trigger_on ? flip << 4 : flip << 2;
        const unsigned variant = (mask & ~inactive) | shifted;
        const double r = score_tree(tree, testing::response_for(bits(variant, 6)), {}).root_reward;
        if (r != base) ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("single-child composites pass their child's reward through") {
  testing::TreeGenerator gen(99);
  const std::string response = "A response with words, *marks* and [slots].\n\nP.S. done";
  RewardConfig cfg;
  for (int i = 0; i < 100; ++i) {
    const LogicNode child = gen.tree(3);
    if (contains_soft_leaf(child)) continue;
    const double inner = score_tree(child, response, "Prompt.", cfg).root_reward;
    CHECK(score_tree(LogicNode::parallel({child}), response, "Prompt.", cfg).root_reward == inner);
    CHECK(score_tree(LogicNode::sequential({child}), response, "Prompt.", cfg).root_reward == inner);
  }
}

TEST_CASE("every node reward stays in [0, 1]") {
  testing::TreeGenerator gen(1234);
  const FixedScorer scorer(0.7);
  for (int i = 0; i < 300; ++i) {
    const LogicNode tree = gen.tree(5);
    const EvalTrace trace = score_tree(tree, "Some text, with a comma.", "Prompt?", {}, &scorer);
    for (const NodeResult& node : trace.nodes) {
      CHECK(node.reward >= 0.0);
      CHECK(node.reward <= 1.0);
    }
  }
}

TEST_CASE("soft leaves") {
  const LogicNode tree = LogicNode::parallel({hard_leaf("h", "ok"), soft_leaf("s1")});
  SUBCASE("binarized at the threshold") {
    const FixedScorer high(0.5), low(0.49);
    CHECK(score_tree(tree, "ok", {}, {}, &high).root_reward == 1.0);
    CHECK(score_tree(tree, "ok", {}, {}, &low).root_reward == 0.5);
  }
  SUBCASE("no scorer names the leaf") {
    try {
      score_tree(tree, "ok", {});
      FAIL("expected ScoringUnavailable");
    } catch (const ScoringUnavailable& e) {
      CHECK(std::string(e.what()).find("s1") != std::string::npos);
    }
  }
  SUBCASE("scorer failure propagates, never a zero") {
    const FailingScorer failing;
    CHECK(code_of([&] { score_tree(tree, "ok", {}, {}, &failing); }) ==
          ErrorCode::kScoringUnavailable);
  }
  SUBCASE("inactive soft branch needs no scorer") {
    const LogicNode cond = LogicNode::conditional(hard_leaf("t", "go"), hard_leaf("a", "ok"),
                                                  soft_leaf("s2"));
    CHECK(score_tree(cond, "go ok", {}).root_reward == 1.0);
  }
}

TEST_CASE("group advantages") {
  SUBCASE("degenerate group") {
    const GroupScore g = group_advantages(std::vector<double>{0.5, 0.5, 0.5});
    CHECK(g.advantages == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(g.group_size() == 3);
  }
  SUBCASE("two rollouts") {
    const GroupScore g = group_advantages(std::vector<double>{0, 1}, 1e-6);
    const double a = 0.5 / (0.5 + 1e-6);
    CHECK(std::fabs(g.advantages[0] + a) <= 1e-15);
    CHECK(std::fabs(g.advantages[1] - a) <= 1e-15);
  }
  SUBCASE("random groups are centred") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> rewards(2 + rng() % 15);
      for (double& r : rewards) r = unit(rng);
      const GroupScore g = group_advantages(rewards);
      CHECK(std::fabs(std::accumulate(g.advantages.begin(), g.advantages.end(), 0.0)) <= 1e-9);
    }
  }
  SUBCASE("errors") {
    CHECK(code_of([] { group_advantages(std::vector<double>{1.0}); }) == ErrorCode::kInvalidArgument);
    CHECK(code_of([] { group_advantages(std::vector<double>{0.0, 1.0}, 0.0); }) ==
          ErrorCode::kInvalidArgument);
  }
}

}  // namespace
}  // namespace lsr
