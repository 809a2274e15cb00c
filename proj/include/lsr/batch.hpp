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

// JSONL streaming over the engine: scoring, fixture verification and group
// advantages. Rows are processed in blocks by a small worker pool and written
// back in input order, so output bytes do not depend on `jobs`.
//
// Row-level problems (bad JSON, schema errors, unknown kinds) abort the
// stream with Error when `strict` is set and are otherwise skipped with a
// "line N: ..." warning. An unavailable soft scorer always aborts.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/reward.hpp"
#include "lsr/soft_scorer.hpp"
#include "lsr/verifiers.hpp"

namespace lsr {

struct StreamOptions {
  std::size_t jobs = 1;
  bool strict = false;
  std::size_t block_size = 512;
};

struct StreamSummary {
  std::size_t rows = 0;     // non-blank input lines
  std::size_t emitted = 0;  // output rows written
  std::size_t skipped = 0;
  std::size_t failed = 0;   // verify: fixtures whose verdict != expect
  double mean_reward = 0.0; // score: mean root reward over emitted rows
  std::vector<std::string> warnings;

  std::string to_json() const;
};

struct ScoreContext {
  RewardConfig config;
  const SoftScorer* soft_scorer = nullptr;
  VerifyOptions verify_options;
};

// {"root_reward": r, "trace": {path: {"reward", "active", "type", "id"?,
// "verdict"?}}} with paths in pre-order. Doubles round-trip exactly.
std::string trace_to_json(const EvalTrace& trace);

// Scores one input row: {"record": InstructionRecord, "response": str} or
// {"tree": node, "instruction": str (optional), "response": str}.
EvalTrace score_row(std::string_view json_line, const ScoreContext& context);

StreamSummary score_stream(std::istream& in, std::ostream& out, const ScoreContext& context,
                           const StreamOptions& options);

// Fixture rows {"kind", "params", "response", "expect", "instruction"?}.
// Emits {"line", "kind", "verdict", "expect", "pass", "detail"} per row.
StreamSummary verify_stream(std::istream& in, std::ostream& out,
                            const VerifyOptions& verify_options, const StreamOptions& options);

// Rows {"group": str|int, "reward": float}. Emits one
// {"group", "rewards", "advantages"} row per group, ordered by group id, with
// rewards in input order. Singleton groups count as row problems.
StreamSummary advantages_stream(std::istream& in, std::ostream& out, double eps,
                                const StreamOptions& options);

}  // namespace lsr
