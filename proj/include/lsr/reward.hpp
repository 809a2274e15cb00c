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

// Structure-aware reward aggregation over logic trees.
//
//   parallel     R = mean(r_i)
//   sequential   r'_i = r_i * prod_{j<i} gamma^(1 - r_j),  R = mean(r'_i)
//   conditional  R = r_true if r_trigger >= threshold else r_false
//
// Child rewards may be fractional when children are themselves composite;
// with binary children the sequential rule is the usual penalty propagation
// where each earlier failure multiplies later rewards by gamma.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/constraint_model.hpp"
#include "lsr/soft_scorer.hpp"
#include "lsr/verifiers.hpp"

namespace lsr {

struct RewardConfig {
  double gamma = 0.5;
  double trigger_threshold = 1.0;
  double soft_binarize_threshold = 0.5;

  // Throws Error(kInvalidArgument) when a field is out of range.
  void validate() const;
};

double reward_parallel(std::span<const double> child_rewards);
double reward_sequential(std::span<const double> child_rewards, double gamma);
double reward_conditional(double trigger_reward, double true_reward, double false_reward,
                          const RewardConfig& config = {});

struct NodeResult {
  std::string path;  // "$", "$.0", "$.1.trigger", ...
  NodeType type = NodeType::kLeaf;
  std::string constraint_id;  // leaves only
  std::optional<int> verdict;  // evaluated leaves only
  double reward = 0.0;
  bool active = true;
  std::string detail;  // leaves only
};

struct EvalTrace {
  std::vector<NodeResult> nodes;  // pre-order
  double root_reward = 0.0;

  const NodeResult* find(std::string_view path) const;
};

// Post-order evaluation. Subtrees under the branch a conditional did not take
// are not evaluated: they are recorded inactive with reward 0 and no verdict.
// Throws ScoringUnavailable for a soft leaf without a scorer or when the
// scorer fails; malformed specs propagate as Error.
EvalTrace score_tree(const LogicNode& tree, std::string_view response,
                     std::string_view instruction, const RewardConfig& config = {},
                     const SoftScorer* soft_scorer = nullptr,
                     const VerifyOptions& verify_options = {});

struct GroupScore {
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::size_t group_size() const { return rewards.size(); }
};

// A_i = (R_i - mean) / (std + eps) with the population standard deviation.
// A group of identical rewards yields exact zeros.
GroupScore group_advantages(std::span<const double> rewards, double eps = 1e-6);

}  // namespace lsr
