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

// Construction of logic-structured multi-constraint instructions.
//
// Two paths produce InstructionRecords from seed questions:
//  * template mode: constraints are sampled from the hard catalog (optionally
//    mixed with soft types) and joined by the connective template of the
//    requested structure. Fully deterministic for a given RNG seed.
//  * LLM mode: a chat model receives the composition prompt, replies with
//    composite constraints in JSON, and each reply is turned into records
//    through the same templates.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/chat_client.hpp"
#include "lsr/constraint_model.hpp"

namespace lsr {

struct SeedQuestion {
  std::string text;
  SeedSource source = SeedSource::kCustom;
};

// {"text": str, "source": str}. Throws Error(kSchema).
SeedQuestion parse_seed(std::string_view json_line);

enum class Composition { kParallel, kSequential, kConditional };

std::string_view to_string(Composition composition);
std::optional<Composition> parse_composition(std::string_view text);

struct CompositionRequest {
  SeedQuestion seed;
  Composition structure = Composition::kParallel;
  // Conditional: exactly {trigger, true branch, false branch}.
  std::vector<ConstraintSpec> constraints;

  // Throws Error(kInvalidArgument) on slot-count mismatch or empty seed.
  void validate() const;
};

// Imperative English rendering, e.g. "do not use any commas". Soft
// constraints render as their description.
std::string describe_constraint(const ConstraintSpec& spec);

// parallel:     "<c1> and <c2> and <c3>."
// sequential:   "First, <c1>, then <c2>, finally <c3>."
// conditional:  "If you <c1>, <c2>; else, <c3>."
// The sentence is appended to the seed text; the tree mirrors it.
InstructionRecord compose_template(const CompositionRequest& request);

// "<Name>: <definition>" for each of the 25 soft constraint types.
std::vector<std::string> default_taxonomy();

// Composition prompt asking a chat model for three composite constraints.
// Throws Error(kInvalidArgument) for an empty taxonomy.
std::string build_llm_prompt(const SeedQuestion& seed, std::span<const std::string> taxonomy);

// Extracts the first balanced JSON object carrying "composite_constraints"
// and maps And/Chain/Selection onto the three structures. Sub-constraints
// become soft constraints (kind from an optional "type" field, otherwise
// "semantic") unless they carry explicit "kind"/"params". Slot names become
// constraint ids. Throws Error(kSchema).
std::vector<CompositionRequest> parse_composition_reply(std::string_view reply,
                                                        const SeedQuestion& seed = {});

// Inverse of parse_composition_reply for the constraints it can express.
std::string render_composition_reply(std::span<const CompositionRequest> requests);

// Random constraint of the given catalog kind with plausible parameters.
ConstraintSpec sample_constraint(std::string_view kind, std::string id, std::mt19937_64& rng);

struct TemplateBuildOptions {
  std::uint64_t seed = 1;
  // Cycled per generated record.
  std::vector<Composition> structures = {Composition::kParallel, Composition::kSequential,
                                         Composition::kConditional};
  std::size_t records_per_seed = 1;
  std::size_t parallel_width = 3;  // constraints per parallel/sequential record
  double soft_fraction = 0.0;      // probability that a slot is a soft type
};

std::vector<InstructionRecord> build_template_records(std::span<const SeedQuestion> seeds,
                                                     const TemplateBuildOptions& options);

struct LlmBuildResult {
  std::vector<InstructionRecord> records;  // seed order, then reply order
  std::vector<std::string> warnings;       // one per seed whose reply was unusable
};

// Issues at most `concurrency` chat requests at a time.
LlmBuildResult build_llm_records(std::span<const SeedQuestion> seeds, const ChatClient& client,
                                 std::size_t concurrency = 4);

struct StructureStats {
  std::size_t instructions = 0;
  std::size_t constraint_kinds = 0;
  std::size_t total_constraints = 0;

  bool operator==(const StructureStats&) const = default;
};

// Rows are keyed by the root node's structure, so a nested record counts
// under the composition at its root. A bare leaf counts as parallel.
struct DatasetStats {
  StructureStats parallel;
  StructureStats sequential;
  StructureStats conditional;
  std::size_t nested_records = 0;
  std::size_t malformed_lines = 0;
  std::vector<std::string> warnings;
};

DatasetStats dataset_stats(std::span<const InstructionRecord> records);
// Malformed lines are skipped and reported as "line N: ..." warnings.
DatasetStats dataset_stats(std::istream& jsonl);

std::string format_stats_tsv(const DatasetStats& stats);
std::string format_stats_json(const DatasetStats& stats);

}  // namespace lsr
