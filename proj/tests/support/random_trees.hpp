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

#include <random>
#include <string>
#include <vector>

#include "lsr/constraint_model.hpp"
#include "lsr/dataset.hpp"

namespace lsr::testing {

// Random well-formed tree with unique ids c1, c2, ... Internal nodes appear
// with decreasing probability as depth grows; `min_depth` forces composite
// nodes down to that depth along the first child.
class TreeGenerator {
 public:
  explicit TreeGenerator(std::uint64_t seed) : rng_(seed) {}

  LogicNode tree(int max_depth = 4, int min_depth = 1) {
    next_id_ = 0;
    return node(0, max_depth, min_depth);
  }

 private:
  LogicNode node(int depth, int max_depth, int min_depth) {
    const bool force_internal = depth < min_depth - 1;
    const bool leaf = !force_internal && (depth >= max_depth - 1 || rng_() % 3 == 0);
    if (leaf) return LogicNode::leaf(constraint());
    const int type = static_cast<int>(rng_() % 3);
    if (type == 2) {
      LogicNode trigger = node(depth + 1, max_depth, min_depth);
      LogicNode if_true = node(depth + 1, max_depth, 0);
      LogicNode if_false = node(depth + 1, max_depth, 0);
      return LogicNode::conditional(std::move(trigger), std::move(if_true), std::move(if_false));
    }
    std::vector<LogicNode> children;
    const std::size_t width = 1 + rng_() % 3;
    for (std::size_t i = 0; i < width; ++i) {
      children.push_back(node(depth + 1, max_depth, i == 0 ? min_depth : 0));
    }
    return type == 0 ? LogicNode::parallel(std::move(children))
                     : LogicNode::sequential(std::move(children));
  }

  ConstraintSpec constraint() {
    const auto catalog = kind_catalog();
    const KindInfo& info = catalog[rng_() % catalog.size()];
    return sample_constraint(info.name, "c" + std::to_string(++next_id_), rng_);
  }

  std::mt19937_64 rng_;
  int next_id_ = 0;
};

}  // namespace lsr::testing
