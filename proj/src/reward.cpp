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

#include "lsr/reward.hpp"

#include <algorithm>
#include <cmath>

namespace lsr {
namespace {

void check_unit(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(what) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

void check_rewards(std::span<const double> rewards, const char* what) {
  if (rewards.empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + ": empty reward list");
  }
  for (double r : rewards) check_unit(r, "child reward");
}

class TreeScorer {
 public:
  TreeScorer(std::string_view response, std::string_view instruction, const RewardConfig& config,
             const SoftScorer* soft_scorer, const VerifyOptions& verify_options)
      : response_(response), instruction_(instruction), config_(config),
        soft_scorer_(soft_scorer), verify_options_(verify_options) {}

  double evaluate(const LogicNode& node, const std::string& path) {
    const std::size_t slot = trace_.nodes.size();
    NodeResult entry;
    entry.path = path;
    entry.type = node.type();
    trace_.nodes.push_back(std::move(entry));
    double reward = 0.0;
    switch (node.type()) {
      case NodeType::kLeaf:
        reward = evaluate_leaf(node.spec(), slot);
        break;
      case NodeType::kParallel:
      case NodeType::kSequential: {
        std::vector<double> child_rewards;
        child_rewards.reserve(node.children().size());
        for (std::size_t i = 0; i < node.children().size(); ++i) {
          child_rewards.push_back(evaluate(node.children()[i], path + "." + std::to_string(i)));
        }
        reward = node.type() == NodeType::kParallel
                     ? reward_parallel(child_rewards)
                     : reward_sequential(child_rewards, config_.gamma);
        break;
      }
      case NodeType::kConditional: {
        const double trigger = evaluate(node.trigger(), path + ".trigger");
        const bool take_true = trigger >= config_.trigger_threshold;
        double taken = 0.0;
        if (take_true) {
          taken = evaluate(node.if_true(), path + ".true");
          record_inactive(node.if_false(), path + ".false");
        } else {
          record_inactive(node.if_true(), path + ".true");
          taken = evaluate(node.if_false(), path + ".false");
        }
        reward = taken;
        break;
      }
    }
    trace_.nodes[slot].reward = reward;
    return reward;
  }

  EvalTrace finish(double root) {
    trace_.root_reward = root;
    return std::move(trace_);
  }

 private:
  double evaluate_leaf(const ConstraintSpec& spec, std::size_t slot) {
    trace_.nodes[slot].constraint_id = spec.id();
    int verdict = 0;
    if (spec.mode() == Mode::kHard) {
      Verdict v = verify(spec, response_, instruction_, verify_options_);
      verdict = v.satisfied;
      trace_.nodes[slot].detail = std::move(v.detail);
    } else {
      if (soft_scorer_ == nullptr) {
        throw ScoringUnavailable("soft constraint '" + spec.id() +
                                 "' requires a soft scorer but none is configured");
      }
      SoftScoreResult result;
      try {
        result = score_soft(*soft_scorer_,
                            SoftScoreRequest{std::string(response_),
                                             spec.string_param("description")},
                            config_.soft_binarize_threshold);
      } catch (const ScoringUnavailable& e) {
        throw ScoringUnavailable("soft constraint '" + spec.id() + "': " + e.what());
      }
      verdict = result.satisfied;
      trace_.nodes[slot].detail = "soft score " + std::to_string(result.score);
    }
    trace_.nodes[slot].verdict = verdict;
    return static_cast<double>(verdict);
  }

  void record_inactive(const LogicNode& node, const std::string& path) {
    NodeResult result;
    result.path = path;
    result.type = node.type();
    result.active = false;
    if (node.is_leaf()) result.constraint_id = node.spec().id();
    trace_.nodes.push_back(std::move(result));
    if (node.type() == NodeType::kConditional) {
      record_inactive(node.trigger(), path + ".trigger");
      record_inactive(node.if_true(), path + ".true");
      record_inactive(node.if_false(), path + ".false");
      return;
    }
    for (std::size_t i = 0; i < node.children().size(); ++i) {
      record_inactive(node.children()[i], path + "." + std::to_string(i));
    }
  }

  std::string_view response_;
  std::string_view instruction_;
  const RewardConfig& config_;
  const SoftScorer* soft_scorer_;
  const VerifyOptions& verify_options_;
  EvalTrace trace_;
};

}  // namespace

void RewardConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1)");
  }
  if (!(trigger_threshold > 0.0 && trigger_threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "trigger_threshold must lie in (0, 1]");
  }
  if (!(soft_binarize_threshold > 0.0 && soft_binarize_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "soft_binarize_threshold must lie in (0, 1)");
  }
}

double reward_parallel(std::span<const double> child_rewards) {
  check_rewards(child_rewards, "parallel");
  double sum = 0.0;
  for (double r : child_rewards) sum += r;
  return sum / static_cast<double>(child_rewards.size());
}

double reward_sequential(std::span<const double> child_rewards, double gamma) {
  check_rewards(child_rewards, "sequential");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must lie in [0, 1)");
  }
  double discount = 1.0;
  double sum = 0.0;
  for (double r : child_rewards) {
    sum += r * discount;
    discount *= std::pow(gamma, 1.0 - r);
  }
  return sum / static_cast<double>(child_rewards.size());
}

double reward_conditional(double trigger_reward, double true_reward, double false_reward,
                          const RewardConfig& config) {
  check_unit(trigger_reward, "trigger reward");
  check_unit(true_reward, "true-branch reward");
  check_unit(false_reward, "false-branch reward");
  return trigger_reward >= config.trigger_threshold ? true_reward : false_reward;
}

const NodeResult* EvalTrace::find(std::string_view path) const {
  auto it = std::find_if(nodes.begin(), nodes.end(),
                         [&](const NodeResult& node) { return node.path == path; });
  return it == nodes.end() ? nullptr : &*it;
}

EvalTrace score_tree(const LogicNode& tree, std::string_view response,
                     std::string_view instruction, const RewardConfig& config,
                     const SoftScorer* soft_scorer, const VerifyOptions& verify_options) {
  config.validate();
  TreeScorer scorer(response, instruction, config, soft_scorer, verify_options);
  const double root = scorer.evaluate(tree, "$");
  return scorer.finish(root);
}

GroupScore group_advantages(std::span<const double> rewards, double eps) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "group_advantages needs a group of at least 2, got " +
                                                 std::to_string(rewards.size()));
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps must be > 0");
  for (double r : rewards) {
    if (!std::isfinite(r)) throw Error(ErrorCode::kInvalidArgument, "rewards must be finite");
  }
  GroupScore out;
  out.rewards.assign(rewards.begin(), rewards.end());
  out.advantages.assign(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) {
    return out;
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  // Second pass removes the rounding left in the first mean.
  double correction = 0.0;
  for (double r : rewards) correction += r - mean;
  mean += correction / n;
  double variance = 0.0;
  for (double r : rewards) variance += (r - mean) * (r - mean);
  const double scale = std::sqrt(variance / n) + eps;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out.advantages[i] = (rewards[i] - mean) / scale;
  }
  return out;
}

}  // namespace lsr
