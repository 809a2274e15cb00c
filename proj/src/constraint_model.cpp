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

#include "lsr/constraint_model.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "json_convert.hpp"

namespace lsr {
namespace {

using PT = ParamType;

constexpr ParamDecl kNone[] = {{"__none__", PT::kInt, false}};
constexpr ParamDecl kKeywords[] = {{"keywords", PT::kStringList}};
constexpr ParamDecl kWordFreq[] = {
    {"word", PT::kString}, {"N", PT::kInt}, {"relation", PT::kString}};
constexpr ParamDecl kLetterFreq[] = {
    {"letter", PT::kString}, {"N", PT::kInt}, {"relation", PT::kString}};
constexpr ParamDecl kLanguage[] = {{"language", PT::kString}};
constexpr ParamDecl kCount[] = {{"N", PT::kInt}};
constexpr ParamDecl kCountRelation[] = {{"N", PT::kInt}, {"relation", PT::kString}};
constexpr ParamDecl kFirstWord[] = {{"N", PT::kInt}, {"i", PT::kInt}, {"word", PT::kString}};
constexpr ParamDecl kMarker[] = {{"marker", PT::kString}};
constexpr ParamDecl kOptions[] = {{"options", PT::kStringList}};
constexpr ParamDecl kSections[] = {{"N", PT::kInt}, {"splitter", PT::kString}};
constexpr ParamDecl kRepeat[] = {{"prompt", PT::kString, false}};
constexpr ParamDecl kPhrase[] = {{"phrase", PT::kString}};
constexpr ParamDecl kDescription[] = {{"description", PT::kString}};

std::span<const ParamDecl> none() { return {kNone, 0}; }

#define LSR_HARD(name, family, decls) \
  KindInfo { name, Family::family, Mode::kHard, decls, name, "" }
#define LSR_SOFT(name, label, definition) \
  KindInfo { name, Family::kSoft, Mode::kSoft, kDescription, label, definition }

const std::array<KindInfo, 50>& catalog() {
  static const std::array<KindInfo, 50> kCatalog = {
      LSR_HARD("include_keywords", kKeywords, kKeywords),
      LSR_HARD("keyword_frequency", kKeywords, kWordFreq),
      LSR_HARD("forbidden_words", kKeywords, kKeywords),
      LSR_HARD("letter_frequency", kKeywords, kLetterFreq),
      LSR_HARD("response_language", kKeywords, kLanguage),
      LSR_HARD("number_paragraphs", kLength, kCount),
      LSR_HARD("number_words", kLength, kCountRelation),
      LSR_HARD("number_sentences", kLength, kCountRelation),
      LSR_HARD("paragraphs_first_word", kLength, kFirstWord),
      LSR_HARD("postscript", kDetectableContent, kMarker),
      LSR_HARD("number_placeholders", kDetectableContent, kCount),
      LSR_HARD("number_bullets", kDetectableFormat, kCount),
      LSR_HARD("title", kDetectableFormat, none()),
      LSR_HARD("choose_from", kDetectableFormat, kOptions),
      LSR_HARD("min_highlighted", kDetectableFormat, kCount),
      LSR_HARD("multiple_sections", kDetectableFormat, kSections),
      LSR_HARD("json_format", kDetectableFormat, none()),
      LSR_HARD("repeat_prompt", kCombination, kRepeat),
      LSR_HARD("two_responses", kCombination, none()),
      LSR_HARD("all_uppercase", kChangeCase, none()),
      LSR_HARD("all_lowercase", kChangeCase, none()),
      LSR_HARD("capital_word_frequency", kChangeCase, kCountRelation),
      LSR_HARD("end_checker", kStartEnd, kPhrase),
      LSR_HARD("quotation", kStartEnd, none()),
      LSR_HARD("no_commas", kPunctuation, none()),

      LSR_SOFT("lexical_content", "Lexical content constraint",
               "must include specific terms or symbols with precise placement."),
      LSR_SOFT("element", "Element constraint", "include specific entities or scenarios."),
      LSR_SOFT("semantic", "Semantic constraint", "focus on themes, tone, or stance."),
      LSR_SOFT("word_count", "Word Count", "limit the number of words."),
      LSR_SOFT("sentence_count", "Sentence Count", "limit the number of sentences."),
      LSR_SOFT("paragraph_count", "Paragraph Count", "limit the number of paragraphs."),
      LSR_SOFT("document_count", "Document Count", "limit the number of documents."),
      LSR_SOFT("tone_emotion", "Tone and emotion", "conform to specific emotional tone."),
      LSR_SOFT("form_style", "Form and style", "use specified stylistic form and perception."),
      LSR_SOFT("audience_specific", "Audience-specific", "tailored to a specific audience group."),
      LSR_SOFT("authorial_style", "Authorial style", "emulate specific authors' styles."),
      LSR_SOFT("fundamental_format", "Fundamental format",
               "follow standard formats like JSON, HTML, etc."),
      LSR_SOFT("bespoke_format", "Bespoke format", "use custom formatting protocols."),
      LSR_SOFT("specialized_format", "Specialized format",
               "tailored for specific applications or domains."),
      LSR_SOFT("pragmatic", "Pragmatic constraint",
               "adapt to context like dialects or language policy."),
      LSR_SOFT("syntactic", "Syntactic constraint",
               "follow specific phrase and clause structures."),
      LSR_SOFT("morphological", "Morphological constraint",
               "control over affixes, roots, and word formation."),
      LSR_SOFT("phonological", "Phonological constraint",
               "focus on sounds, tone, and intonation."),
      LSR_SOFT("role_based", "Role-based constraint", "respond with specific role identity."),
      LSR_SOFT("task_specific", "Task-specific constraint", "address a defined situational task."),
      LSR_SOFT("complex_context", "Complex context constraint",
               "involve multi-faceted and nested reasoning."),
      LSR_SOFT("example", "Example constraint", "conform to patterns from example pairs."),
      LSR_SOFT("inverse", "Inverse constraint", "narrow response space via exclusions."),
      LSR_SOFT("contradictory", "Contradictory constraint",
               "combine requirements that are hard to satisfy simultaneously."),
      LSR_SOFT("rule", "Rule constraint", "follow symbolic or logical operation rules."),
  };
  return kCatalog;
}

#undef LSR_HARD
#undef LSR_SOFT

constexpr std::size_t kHardCount = 25;

std::string_view param_type_name(ParamType type) {
  switch (type) {
    case ParamType::kInt: return "integer";
    case ParamType::kString: return "string";
    case ParamType::kStringList: return "string list";
  }
  return "?";
}

bool holds(const ParamValue& value, ParamType type) {
  switch (type) {
    case ParamType::kInt: return std::holds_alternative<std::int64_t>(value);
    case ParamType::kString: return std::holds_alternative<std::string>(value);
    case ParamType::kStringList: return std::holds_alternative<std::vector<std::string>>(value);
  }
  return false;
}

void validate_params(const std::string& id, const KindInfo& info, const Params& params) {
  auto where = [&](std::string_view key) {
    return "constraint '" + id + "' (" + std::string(info.name) + ") param '" +
           std::string(key) + "'";
  };
  for (const auto& [key, value] : params) {
    auto decl = std::find_if(info.params.begin(), info.params.end(),
                             [&](const ParamDecl& d) { return d.key == key; });
    if (decl == info.params.end()) {
      throw Error(ErrorCode::kSchema, where(key) + ": not accepted by this kind");
    }
    if (!holds(value, decl->type)) {
      throw Error(ErrorCode::kSchema,
                  where(key) + ": expected " + std::string(param_type_name(decl->type)));
    }
  }
  for (const ParamDecl& decl : info.params) {
    auto it = params.find(decl.key);
    if (it == params.end()) {
      if (decl.required) {
        throw Error(ErrorCode::kMissingParam, where(decl.key) + ": required");
      }
      continue;
    }
    const ParamValue& value = it->second;
    if (const auto* n = std::get_if<std::int64_t>(&value); n && *n < 0) {
      throw Error(ErrorCode::kSchema, where(decl.key) + ": must be >= 0");
    }
    if (const auto* s = std::get_if<std::string>(&value); s && s->empty()) {
      throw Error(ErrorCode::kSchema, where(decl.key) + ": must be non-empty");
    }
    if (const auto* list = std::get_if<std::vector<std::string>>(&value)) {
      if (list->empty() ||
          std::any_of(list->begin(), list->end(), [](const auto& s) { return s.empty(); })) {
        throw Error(ErrorCode::kSchema, where(decl.key) + ": must be a non-empty list of "
                                                          "non-empty strings");
      }
    }
  }
  if (auto it = params.find("relation"); it != params.end()) {
    if (!parse_relation(std::get<std::string>(it->second))) {
      throw Error(ErrorCode::kSchema,
                  where("relation") + ": expected at_least, around, at_most or exactly");
    }
  }
  if (auto it = params.find("letter"); it != params.end()) {
    const auto& letter = std::get<std::string>(it->second);
    if (letter.size() != 1 || !std::isalpha(static_cast<unsigned char>(letter[0]))) {
      throw Error(ErrorCode::kSchema, where("letter") + ": expected a single ASCII letter");
    }
  }
  if (info.name == "paragraphs_first_word") {
    auto n = std::get<std::int64_t>(params.at("N"));
    auto i = std::get<std::int64_t>(params.at("i"));
    if (i < 1 || i > n) {
      throw Error(ErrorCode::kSchema, where("i") + ": must lie in [1, N]");
    }
  }
}

}  // namespace

std::span<const KindInfo> kind_catalog() { return catalog(); }
std::span<const KindInfo> hard_kinds() { return kind_catalog().first(kHardCount); }
std::span<const KindInfo> soft_kinds() { return kind_catalog().subspan(kHardCount); }

const KindInfo* find_kind(std::string_view kind) noexcept {
  for (const KindInfo& info : catalog()) {
    if (info.name == kind) return &info;
  }
  return nullptr;
}

const KindInfo& kind_info(std::string_view kind) {
  if (const KindInfo* info = find_kind(kind)) return *info;
  throw Error(ErrorCode::kUnknownKind, "unknown constraint kind '" + std::string(kind) + "'");
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kKeywords: return "keywords";
    case Family::kLength: return "length";
    case Family::kDetectableContent: return "detectable_content";
    case Family::kDetectableFormat: return "detectable_format";
    case Family::kCombination: return "combination";
    case Family::kChangeCase: return "change_case";
    case Family::kStartEnd: return "start_end";
    case Family::kPunctuation: return "punctuation";
    case Family::kSoft: return "soft";
  }
  return "?";
}

std::string_view to_string(Mode mode) { return mode == Mode::kHard ? "hard" : "soft"; }

std::string_view to_string(Relation relation) {
  switch (relation) {
    case Relation::kAtLeast: return "at_least";
    case Relation::kAround: return "around";
    case Relation::kAtMost: return "at_most";
    case Relation::kExactly: return "exactly";
  }
  return "?";
}

std::optional<Relation> parse_relation(std::string_view text) {
  if (text == "at_least") return Relation::kAtLeast;
  if (text == "around") return Relation::kAround;
  if (text == "at_most") return Relation::kAtMost;
  if (text == "exactly") return Relation::kExactly;
  return std::nullopt;
}

std::optional<Mode> parse_mode(std::string_view text) {
  if (text == "hard") return Mode::kHard;
  if (text == "soft") return Mode::kSoft;
  return std::nullopt;
}

ConstraintSpec::ConstraintSpec(std::string id, std::string kind, Params params)
    : id_(std::move(id)), kind_(std::move(kind)), info_(&kind_info(kind_)),
      params_(std::move(params)) {
  if (id_.empty()) throw Error(ErrorCode::kSchema, "constraint id must be non-empty");
  validate_params(id_, *info_, params_);
}

bool ConstraintSpec::has(std::string_view key) const { return params_.find(key) != params_.end(); }

namespace {
template <typename T>
const T& get_param(const Params& params, std::string_view key, const std::string& id) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw Error(ErrorCode::kMissingParam,
                "constraint '" + id + "' is missing param '" + std::string(key) + "'");
  }
  if (const T* value = std::get_if<T>(&it->second)) return *value;
  throw Error(ErrorCode::kSchema,
              "constraint '" + id + "' param '" + std::string(key) + "' has the wrong type");
}
}  // namespace

std::int64_t ConstraintSpec::int_param(std::string_view key) const {
  return get_param<std::int64_t>(params_, key, id_);
}
const std::string& ConstraintSpec::string_param(std::string_view key) const {
  return get_param<std::string>(params_, key, id_);
}
const std::vector<std::string>& ConstraintSpec::list_param(std::string_view key) const {
  return get_param<std::vector<std::string>>(params_, key, id_);
}
Relation ConstraintSpec::relation() const { return *parse_relation(string_param("relation")); }

std::string_view to_string(NodeType type) {
  switch (type) {
    case NodeType::kLeaf: return "leaf";
    case NodeType::kParallel: return "par";
    case NodeType::kSequential: return "seq";
    case NodeType::kConditional: return "cond";
  }
  return "?";
}

LogicNode LogicNode::leaf(ConstraintSpec spec) {
  return LogicNode(NodeType::kLeaf, std::move(spec), {});
}

LogicNode LogicNode::parallel(std::vector<LogicNode> children) {
  if (children.empty()) throw Error(ErrorCode::kSchema, "parallel node needs >= 1 child");
  return LogicNode(NodeType::kParallel, std::nullopt, std::move(children));
}

LogicNode LogicNode::sequential(std::vector<LogicNode> children) {
  if (children.empty()) throw Error(ErrorCode::kSchema, "sequential node needs >= 1 child");
  return LogicNode(NodeType::kSequential, std::nullopt, std::move(children));
}

LogicNode LogicNode::conditional(LogicNode trigger, LogicNode if_true, LogicNode if_false) {
  std::vector<LogicNode> children;
  children.reserve(3);
  children.push_back(std::move(trigger));
  children.push_back(std::move(if_true));
  children.push_back(std::move(if_false));
  return LogicNode(NodeType::kConditional, std::nullopt, std::move(children));
}

const ConstraintSpec& LogicNode::spec() const {
  if (!spec_) throw Error(ErrorCode::kInvalidArgument, "spec() called on a non-leaf node");
  return *spec_;
}

const LogicNode& LogicNode::trigger() const {
  if (type_ != NodeType::kConditional) {
    throw Error(ErrorCode::kInvalidArgument, "trigger() called on a non-conditional node");
  }
  return children_[0];
}
const LogicNode& LogicNode::if_true() const { return (void)trigger(), children_[1]; }
const LogicNode& LogicNode::if_false() const { return (void)trigger(), children_[2]; }

namespace {
void collect_ids(const LogicNode& node, std::set<std::string, std::less<>>& seen) {
  if (node.is_leaf()) {
    if (!seen.insert(node.spec().id()).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate constraint id '" + node.spec().id() + "'");
    }
    return;
  }
  for (const LogicNode& child : node.children()) collect_ids(child, seen);
}
}  // namespace

void validate_unique_ids(const LogicNode& tree) {
  std::set<std::string, std::less<>> seen;
  collect_ids(tree, seen);
}

std::size_t leaf_count(const LogicNode& tree) {
  if (tree.is_leaf()) return 1;
  std::size_t total = 0;
  for (const LogicNode& child : tree.children()) total += leaf_count(child);
  return total;
}

std::size_t tree_depth(const LogicNode& tree) {
  std::size_t deepest = 0;
  for (const LogicNode& child : tree.children()) deepest = std::max(deepest, tree_depth(child));
  return deepest + 1;
}

bool contains_soft_leaf(const LogicNode& tree) {
  if (tree.is_leaf()) return tree.spec().mode() == Mode::kSoft;
  return std::any_of(tree.children().begin(), tree.children().end(),
                     [](const LogicNode& child) { return contains_soft_leaf(child); });
}

std::string_view to_string(StructureLabel label) {
  switch (label) {
    case StructureLabel::kParallel: return "parallel";
    case StructureLabel::kSequential: return "sequential";
    case StructureLabel::kConditional: return "conditional";
    case StructureLabel::kNested: return "nested";
  }
  return "?";
}

std::optional<StructureLabel> parse_structure_label(std::string_view text) {
  if (text == "parallel") return StructureLabel::kParallel;
  if (text == "sequential") return StructureLabel::kSequential;
  if (text == "conditional") return StructureLabel::kConditional;
  if (text == "nested") return StructureLabel::kNested;
  return std::nullopt;
}

namespace {
bool has_nested_composite(const LogicNode& node) {
  for (const LogicNode& child : node.children()) {
    if (!child.is_leaf()) return true;
  }
  return false;
}
}  // namespace

StructureLabel classify_structure(const LogicNode& tree) {
  switch (tree.type()) {
    case NodeType::kLeaf: return StructureLabel::kParallel;
    case NodeType::kParallel:
      return has_nested_composite(tree) ? StructureLabel::kNested : StructureLabel::kParallel;
    case NodeType::kSequential:
      return has_nested_composite(tree) ? StructureLabel::kNested : StructureLabel::kSequential;
    case NodeType::kConditional:
      return has_nested_composite(tree) ? StructureLabel::kNested : StructureLabel::kConditional;
  }
  return StructureLabel::kNested;
}

std::string_view to_string(SeedSource source) {
  switch (source) {
    case SeedSource::kInfinityInstruct: return "infinity_instruct";
    case SeedSource::kOpenAssistant: return "open_assistant";
    case SeedSource::kSelfInstruct: return "self_instruct";
    case SeedSource::kSuperNatural: return "super_natural";
    case SeedSource::kCustom: return "custom";
  }
  return "?";
}

std::optional<SeedSource> parse_seed_source(std::string_view text) {
  for (auto source : {SeedSource::kInfinityInstruct, SeedSource::kOpenAssistant,
                      SeedSource::kSelfInstruct, SeedSource::kSuperNatural, SeedSource::kCustom}) {
    if (to_string(source) == text) return source;
  }
  return std::nullopt;
}

InstructionRecord make_record(std::string instruction, LogicNode tree, std::string seed_source) {
  validate_unique_ids(tree);
  StructureLabel label = classify_structure(tree);
  return InstructionRecord{std::move(instruction), std::move(tree), label, std::move(seed_source)};
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {
namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kSchema, path + ": " + what);
}

const json& require(const json& object, const char* key, const std::string& path) {
  auto it = object.find(key);
  if (it == object.end()) schema_error(path, std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& path) {
  const json& value = require(object, key, path);
  if (!value.is_string()) schema_error(path + "/" + key, "expected a string");
  return value.get<std::string>();
}

void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> allowed,
                         const std::string& path) {
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      schema_error(path, "unexpected key '" + item.key() + "'");
    }
  }
}

}  // namespace

Params params_from_json(const json& params, const std::string& path) {
  if (!params.is_object()) schema_error(path, "params must be an object");
  Params out;
  for (const auto& item : params.items()) {
    const json& value = item.value();
    const std::string where = path + "/" + item.key();
    if (value.is_number_integer()) {
      out.emplace(item.key(), value.get<std::int64_t>());
    } else if (value.is_string()) {
      out.emplace(item.key(), value.get<std::string>());
    } else if (value.is_array()) {
      std::vector<std::string> list;
      for (const json& entry : value) {
        if (!entry.is_string()) schema_error(where, "list entries must be strings");
        list.push_back(entry.get<std::string>());
      }
      out.emplace(item.key(), std::move(list));
    } else {
      schema_error(where, "param values must be integers, strings or string lists");
    }
  }
  return out;
}

json params_to_json(const Params& params) {
  json out = json::object();
  for (const auto& [key, value] : params) {
    std::visit([&, &k = key](const auto& v) { out[k] = v; }, value);
  }
  return out;
}

ConstraintSpec spec_from_json(const json& leaf, const std::string& path) {
  std::string id = require_string(leaf, "id", path);
  std::string kind = require_string(leaf, "kind", path);
  Params params;
  if (auto it = leaf.find("params"); it != leaf.end()) {
    params = params_from_json(*it, path + "/params");
  }
  try {
    ConstraintSpec spec(std::move(id), std::move(kind), std::move(params));
    if (auto it = leaf.find("mode"); it != leaf.end()) {
      auto mode = it->is_string() ? parse_mode(it->get<std::string>()) : std::nullopt;
      if (!mode) schema_error(path + "/mode", "expected \"hard\" or \"soft\"");
      if (*mode != spec.mode()) {
        schema_error(path + "/mode", "kind '" + spec.kind() + "' is " +
                                         std::string(to_string(spec.mode())));
      }
    }
    return spec;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchema && std::string_view(e.what()).starts_with(path)) throw;
    throw Error(e.code(), path + ": " + e.what());
  }
}

json spec_to_json(const ConstraintSpec& spec) {
  return json{{"type", "leaf"},
              {"id", spec.id()},
              {"kind", spec.kind()},
              {"mode", std::string(to_string(spec.mode()))},
              {"params", params_to_json(spec.params())}};
}

LogicNode tree_from_json(const json& node, const std::string& path) {
  if (!node.is_object()) schema_error(path, "node must be an object");
  const std::string type = require_string(node, "type", path);
  if (type == "leaf") {
    reject_unknown_keys(node, {"type", "id", "kind", "mode", "params"}, path);
    return LogicNode::leaf(spec_from_json(node, path));
  }
  if (type == "par" || type == "seq") {
    reject_unknown_keys(node, {"type", "children"}, path);
    const json& children = require(node, "children", path);
    if (!children.is_array()) schema_error(path + "/children", "expected an array");
    if (children.empty()) schema_error(path + "/children", "needs at least one child");
    std::vector<LogicNode> parsed;
    parsed.reserve(children.size());
    for (std::size_t i = 0; i < children.size(); ++i) {
      parsed.push_back(tree_from_json(children[i], path + "/children/" + std::to_string(i)));
    }
    return type == "par" ? LogicNode::parallel(std::move(parsed))
                         : LogicNode::sequential(std::move(parsed));
  }
  if (type == "cond") {
    reject_unknown_keys(node, {"type", "trigger", "true", "false"}, path);
    return LogicNode::conditional(tree_from_json(require(node, "trigger", path), path + "/trigger"),
                                  tree_from_json(require(node, "true", path), path + "/true"),
                                  tree_from_json(require(node, "false", path), path + "/false"));
  }
  schema_error(path + "/type", "unknown node type '" + type + "'");
}

json tree_to_json(const LogicNode& tree) {
  switch (tree.type()) {
    case NodeType::kLeaf: return spec_to_json(tree.spec());
    case NodeType::kParallel:
    case NodeType::kSequential: {
      json children = json::array();
      for (const LogicNode& child : tree.children()) children.push_back(tree_to_json(child));
      return json{{"type", std::string(to_string(tree.type()))}, {"children", std::move(children)}};
    }
    case NodeType::kConditional:
      return json{{"type", "cond"},
                  {"trigger", tree_to_json(tree.trigger())},
                  {"true", tree_to_json(tree.if_true())},
                  {"false", tree_to_json(tree.if_false())}};
  }
  return {};
}

InstructionRecord record_from_json(const json& row, const std::string& path) {
  if (!row.is_object()) schema_error(path, "record must be an object");
  std::string instruction = require_string(row, "instruction", path);
  LogicNode tree = tree_from_json(require(row, "tree", path), path + "/tree");
  validate_unique_ids(tree);
  StructureLabel derived = classify_structure(tree);
  if (auto it = row.find("structure"); it != row.end()) {
    auto label = it->is_string() ? parse_structure_label(it->get<std::string>()) : std::nullopt;
    if (!label) schema_error(path + "/structure", "unknown structure label");
    if (*label != derived) {
      schema_error(path + "/structure", "label '" + it->get<std::string>() +
                                            "' does not match the tree (expected '" +
                                            std::string(to_string(derived)) + "')");
    }
  }
  std::string seed_source;
  if (auto it = row.find("seed_source"); it != row.end()) {
    if (!it->is_string()) schema_error(path + "/seed_source", "expected a string");
    seed_source = it->get<std::string>();
  }
  if (auto it = row.find("constraint_count"); it != row.end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() !=
                                        static_cast<std::int64_t>(leaf_count(tree))) {
      schema_error(path + "/constraint_count", "does not match the number of leaves");
    }
  }
  return InstructionRecord{std::move(instruction), std::move(tree), derived, std::move(seed_source)};
}

json record_to_json(const InstructionRecord& record) {
  return json{{"instruction", record.instruction},
              {"tree", tree_to_json(record.tree)},
              {"structure", std::string(to_string(record.structure))},
              {"seed_source", record.seed_source}};
}

}  // namespace detail

namespace {
detail::json parse_json_text(std::string_view text, const char* what) {
  try {
    return detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string(what) + " is not valid JSON: " + e.what());
  }
}
}  // namespace

LogicNode parse_tree(std::string_view json_text) {
  LogicNode tree = detail::tree_from_json(parse_json_text(json_text, "tree document"), "$");
  validate_unique_ids(tree);
  return tree;
}

std::string serialize_tree(const LogicNode& tree) { return detail::tree_to_json(tree).dump(); }

InstructionRecord parse_record(std::string_view json_line) {
  return detail::record_from_json(parse_json_text(json_line, "record"), "$");
}

std::string serialize_record(const InstructionRecord& record) {
  return detail::record_to_json(record).dump();
}

}  // namespace lsr
