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

// Constraint and logic-tree data model.
//
// A LogicNode is a strict tree: leaves hold one ConstraintSpec, Parallel and
// Sequential nodes hold an ordered child list, and a Conditional node holds a
// trigger plus the two branches selected by it. All types are immutable once
// built and can be shared across threads freely.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lsr/error.hpp"

namespace lsr {

enum class Family {
  kKeywords,
  kLength,
  kDetectableContent,
  kDetectableFormat,
  kCombination,
  kChangeCase,
  kStartEnd,
  kPunctuation,
  kSoft,
};

enum class Mode { kHard, kSoft };

enum class Relation { kAtLeast, kAround, kAtMost, kExactly };

enum class ParamType { kInt, kString, kStringList };

using ParamValue = std::variant<std::int64_t, std::string, std::vector<std::string>>;
using Params = std::map<std::string, ParamValue, std::less<>>;

struct ParamDecl {
  std::string_view key;
  ParamType type;
  bool required = true;
};

struct KindInfo {
  std::string_view name;
  Family family;
  Mode mode;
  std::span<const ParamDecl> params;
  // Human-readable label; for soft kinds this is the taxonomy name.
  std::string_view label;
  // Soft kinds only: one-line definition used in the composition prompt.
  std::string_view definition;
};

// The 25 hard kinds followed by the 25 soft kinds, in catalog order.
std::span<const KindInfo> kind_catalog();
std::span<const KindInfo> hard_kinds();
std::span<const KindInfo> soft_kinds();

// Throws Error(kUnknownKind).
const KindInfo& kind_info(std::string_view kind);
const KindInfo* find_kind(std::string_view kind) noexcept;

std::string_view to_string(Family family);
std::string_view to_string(Mode mode);
std::string_view to_string(Relation relation);
std::optional<Relation> parse_relation(std::string_view text);
std::optional<Mode> parse_mode(std::string_view text);

class ConstraintSpec {
 public:
  // Validates kind membership, required params, param types and value
  // ranges. Throws Error on violation.
  ConstraintSpec(std::string id, std::string kind, Params params = {});

  const std::string& id() const { return id_; }
  const std::string& kind() const { return kind_; }
  Family family() const { return info_->family; }
  Mode mode() const { return info_->mode; }
  const KindInfo& info() const { return *info_; }
  const Params& params() const { return params_; }

  bool has(std::string_view key) const;
  // Accessors throw Error(kMissingParam) when the key is absent.
  std::int64_t int_param(std::string_view key) const;
  const std::string& string_param(std::string_view key) const;
  const std::vector<std::string>& list_param(std::string_view key) const;
  Relation relation() const;

  bool operator==(const ConstraintSpec& other) const {
    return id_ == other.id_ && kind_ == other.kind_ && params_ == other.params_;
  }

 private:
  std::string id_;
  std::string kind_;
  const KindInfo* info_;
  Params params_;
};

enum class NodeType { kLeaf, kParallel, kSequential, kConditional };

std::string_view to_string(NodeType type);

class LogicNode {
 public:
  static LogicNode leaf(ConstraintSpec spec);
  // Throws Error(kSchema) for an empty child list.
  static LogicNode parallel(std::vector<LogicNode> children);
  static LogicNode sequential(std::vector<LogicNode> children);
  static LogicNode conditional(LogicNode trigger, LogicNode if_true, LogicNode if_false);

  NodeType type() const { return type_; }
  bool is_leaf() const { return type_ == NodeType::kLeaf; }

  // Leaf only.
  const ConstraintSpec& spec() const;
  // Parallel/Sequential children; for a Conditional: trigger, true, false.
  std::span<const LogicNode> children() const { return children_; }
  const LogicNode& trigger() const;
  const LogicNode& if_true() const;
  const LogicNode& if_false() const;

  bool operator==(const LogicNode& other) const = default;

 private:
  LogicNode(NodeType type, std::optional<ConstraintSpec> spec, std::vector<LogicNode> children)
      : type_(type), spec_(std::move(spec)), children_(std::move(children)) {}

  NodeType type_;
  std::optional<ConstraintSpec> spec_;
  std::vector<LogicNode> children_;
};

// Throws Error(kDuplicateId) naming the repeated id.
void validate_unique_ids(const LogicNode& tree);

std::size_t leaf_count(const LogicNode& tree);
std::size_t tree_depth(const LogicNode& tree);
bool contains_soft_leaf(const LogicNode& tree);

enum class StructureLabel { kParallel, kSequential, kConditional, kNested };

std::string_view to_string(StructureLabel label);
std::optional<StructureLabel> parse_structure_label(std::string_view text);

// nested iff some non-leaf node has a non-leaf child; otherwise the root's
// variant. A bare leaf root is a one-element parallel set.
StructureLabel classify_structure(const LogicNode& tree);

LogicNode parse_tree(std::string_view json_text);
// Canonical one-line JSON: keys sorted, children order preserved.
std::string serialize_tree(const LogicNode& tree);

enum class SeedSource { kInfinityInstruct, kOpenAssistant, kSelfInstruct, kSuperNatural, kCustom };

std::string_view to_string(SeedSource source);
std::optional<SeedSource> parse_seed_source(std::string_view text);

struct InstructionRecord {
  std::string instruction;
  LogicNode tree;
  StructureLabel structure;
  std::string seed_source;

  std::size_t constraint_count() const { return leaf_count(tree); }

  bool operator==(const InstructionRecord&) const = default;
};

// Builds a record with the structure label derived from the tree.
InstructionRecord make_record(std::string instruction, LogicNode tree, std::string seed_source);

InstructionRecord parse_record(std::string_view json_line);
std::string serialize_record(const InstructionRecord& record);

}  // namespace lsr
