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

#include "lsr/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "json_convert.hpp"
#include "lsr/text_metrics.hpp"

namespace lsr {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename T>
const T& pick(std::span<const T> options, std::mt19937_64& rng) {
  return options[static_cast<std::size_t>(rng() % options.size())];
}

std::int64_t uniform(std::int64_t lo, std::int64_t hi, std::mt19937_64& rng) {
  return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string quoted_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ", ";
    out += "\"" + items[i] + "\"";
  }
  return out;
}

std::string relation_phrase(const ConstraintSpec& spec) {
  std::string phrase;
  switch (spec.relation()) {
    case Relation::kAtLeast: phrase = "at least "; break;
    case Relation::kAround: phrase = "around "; break;
    case Relation::kAtMost: phrase = "at most "; break;
    case Relation::kExactly: phrase = "exactly "; break;
  }
  return phrase + std::to_string(spec.int_param("N"));
}

std::string capitalize(std::string text) {
  if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] = static_cast<char>(text[0] - 32);
  return text;
}

std::string language_name(const std::string& code) {
  static const std::map<std::string, std::string, std::less<>> kNames = {
      {"en", "English"}, {"fr", "French"},  {"de", "German"},  {"es", "Spanish"},
      {"it", "Italian"}, {"pt", "Portuguese"}, {"ru", "Russian"}, {"zh", "Chinese"},
      {"ja", "Japanese"}, {"ko", "Korean"}, {"ar", "Arabic"}};
  auto it = kNames.find(code);
  return it == kNames.end() ? "the language '" + code + "'" : it->second;
}

std::string times(std::int64_t n) { return n == 1 ? "time" : "times"; }

// Soft descriptions used when template mode mixes in soft types.
const std::map<std::string_view, std::string_view>& soft_description_bank() {
  static const std::map<std::string_view, std::string_view> kBank = {
      {"lexical_content", "include the word 'beautiful' in the first sentence"},
      {"element", "mention a specific landmark such as the Great Wall"},
      {"semantic", "keep an optimistic stance throughout"},
      {"word_count", "keep the answer short enough to read in one minute"},
      {"sentence_count", "use only a handful of sentences"},
      {"paragraph_count", "divide the answer into three sections"},
      {"document_count", "list three reference articles"},
      {"tone_emotion", "write in an angry and sarcastic tone"},
      {"form_style", "write in an encyclopedic style"},
      {"audience_specific", "make it understandable for a 6-year-old"},
      {"authorial_style", "write in the style of Shakespeare"},
      {"fundamental_format", "format the answer as HTML"},
      {"bespoke_format", "bold the main idea and use an unordered list"},
      {"specialized_format", "format it as an electronic medical record"},
      {"pragmatic", "use British English spelling"},
      {"syntactic", "use imperative sentences only"},
      {"morphological", "avoid words ending in -ly"},
      {"phonological", "make every line alliterate"},
      {"role_based", "answer as if you were Confucius"},
      {"task_specific", "frame the answer as a report to a remote manager"},
      {"complex_context", "account for all of the stated conditions at once"},
      {"example", "follow the pattern of the given input/output pairs"},
      {"inverse", "avoid any political topics"},
      {"contradictory", "be both extremely brief and exhaustive"},
      {"rule", "treat every addition as adding one extra unit"},
  };
  return kBank;
}

void require_slots(const CompositionRequest& request) {
  const std::size_t n = request.constraints.size();
  if (request.structure == Composition::kConditional && n != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "conditional composition needs exactly 3 constraints (trigger, true, false), got " +
                    std::to_string(n));
  }
  if (request.structure != Composition::kConditional && n < 2) {
    throw Error(ErrorCode::kInvalidArgument, std::string(to_string(request.structure)) +
                                                 " composition needs at least 2 constraints, got " +
                                                 std::to_string(n));
  }
}

// Balanced-brace scan that respects JSON strings.
std::optional<std::string_view> balanced_object_at(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

std::optional<Composition> composition_from_type(std::string_view type) {
  const std::string lower = text::ascii_lower(text::trim(type));
  if (lower == "and") return Composition::kParallel;
  if (lower == "chain") return Composition::kSequential;
  if (lower == "selection") return Composition::kConditional;
  return std::nullopt;
}

std::string_view reply_type(Composition composition) {
  switch (composition) {
    case Composition::kParallel: return "And";
    case Composition::kSequential: return "Chain";
    case Composition::kConditional: return "Selection";
  }
  return "?";
}

const KindInfo* soft_kind_for_type(std::string_view type) {
  const std::string lower = text::ascii_lower(text::trim(type));
  for (const KindInfo& info : soft_kinds()) {
    if (info.name == lower || text::ascii_lower(info.label) == lower) return &info;
  }
  return nullptr;
}

ConstraintSpec sub_constraint_from_json(const std::string& slot, const ordered_json& value,
                                        const std::string& path) {
  if (value.is_string()) {
    return ConstraintSpec(slot, "semantic", Params{{"description", value.get<std::string>()}});
  }
  if (!value.is_object()) {
    throw Error(ErrorCode::kSchema, path + ": sub-constraint must be a string or an object");
  }
  if (value.contains("kind")) {
    const json plain = json::parse(value.dump());
    json leaf = {{"id", slot}, {"kind", plain["kind"]}};
    if (plain.contains("params")) leaf["params"] = plain["params"];
    return detail::spec_from_json(leaf, path);
  }
  if (!value.contains("constraint") || !value["constraint"].is_string() ||
      value["constraint"].get<std::string>().empty()) {
    throw Error(ErrorCode::kSchema, path + ": missing \"constraint\" text");
  }
  std::string kind = "semantic";
  if (value.contains("type") && value["type"].is_string()) {
    const KindInfo* info = soft_kind_for_type(value["type"].get<std::string>());
    if (info == nullptr) {
      throw Error(ErrorCode::kSchema,
                  path + ": unknown constraint type '" + value["type"].get<std::string>() + "'");
    }
    kind = std::string(info->name);
  }
  return ConstraintSpec(slot, kind, Params{{"description", value["constraint"].get<std::string>()}});
}

CompositionRequest request_from_json(const ordered_json& element, const SeedQuestion& seed,
                                     const std::string& path) {
  const ordered_json* body = &element;
  if (element.is_object() && element.contains("composite_constraint")) {
    body = &element["composite_constraint"];
  }
  if (!body->is_object() || !body->contains("type") || !(*body)["type"].is_string()) {
    throw Error(ErrorCode::kSchema, path + ": missing composition \"type\"");
  }
  const std::string type = (*body)["type"].get<std::string>();
  auto structure = composition_from_type(type);
  if (!structure) {
    throw Error(ErrorCode::kSchema,
                path + ": unknown composition type '" + type + "' (expected And, Chain or Selection)");
  }
  if (!body->contains("sub_constraints")) {
    throw Error(ErrorCode::kSchema, path + ": missing \"sub_constraints\"");
  }
  const ordered_json& subs = (*body)["sub_constraints"];
  CompositionRequest request{seed, *structure, {}};
  if (subs.is_object()) {
    for (const auto& item : subs.items()) {
      request.constraints.push_back(
          sub_constraint_from_json(item.key(), item.value(), path + "/sub_constraints/" + item.key()));
    }
  } else if (subs.is_array()) {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      request.constraints.push_back(sub_constraint_from_json(
          "c" + std::to_string(i + 1), subs[i], path + "/sub_constraints/" + std::to_string(i)));
    }
  } else {
    throw Error(ErrorCode::kSchema, path + ": \"sub_constraints\" must be an object or array");
  }
  try {
    require_slots(request);
  } catch (const Error& e) {
    throw Error(ErrorCode::kSchema, path + ": " + e.what());
  }
  return request;
}

void add_record(StructureStats& row, std::set<std::string>& kinds, const LogicNode& node) {
  ++row.instructions;
  std::vector<const LogicNode*> stack{&node};
  while (!stack.empty()) {
    const LogicNode* current = stack.back();
    stack.pop_back();
    if (current->is_leaf()) {
      ++row.total_constraints;
      kinds.insert(current->spec().kind());
      continue;
    }
    for (const LogicNode& child : current->children()) stack.push_back(&child);
  }
  row.constraint_kinds = kinds.size();
}

class StatsAccumulator {
 public:
  void add(const InstructionRecord& record) {
    switch (record.tree.type()) {
      case NodeType::kLeaf:
      case NodeType::kParallel: add_record(stats_.parallel, kinds_[0], record.tree); break;
      case NodeType::kSequential: add_record(stats_.sequential, kinds_[1], record.tree); break;
      case NodeType::kConditional: add_record(stats_.conditional, kinds_[2], record.tree); break;
    }
    if (record.structure == StructureLabel::kNested) ++stats_.nested_records;
  }
  DatasetStats& stats() { return stats_; }

 private:
  DatasetStats stats_;
  std::set<std::string> kinds_[3];
};

}  // namespace

SeedQuestion parse_seed(std::string_view json_line) {
  json row = json::parse(json_line, nullptr, false);
  if (row.is_discarded() || !row.is_object()) {
    throw Error(ErrorCode::kSchema, "seed row is not a JSON object");
  }
  if (!row.contains("text") || !row["text"].is_string() || row["text"].get<std::string>().empty()) {
    throw Error(ErrorCode::kSchema, "seed row needs a non-empty \"text\"");
  }
  SeedQuestion seed{row["text"].get<std::string>(), SeedSource::kCustom};
  if (row.contains("source")) {
    auto source = row["source"].is_string()
                      ? parse_seed_source(row["source"].get<std::string>())
                      : std::nullopt;
    if (!source) throw Error(ErrorCode::kSchema, "seed row has an unknown \"source\"");
    seed.source = *source;
  }
  return seed;
}

std::string_view to_string(Composition composition) {
  switch (composition) {
    case Composition::kParallel: return "parallel";
    case Composition::kSequential: return "sequential";
    case Composition::kConditional: return "conditional";
  }
  return "?";
}

std::optional<Composition> parse_composition(std::string_view text) {
  if (text == "parallel") return Composition::kParallel;
  if (text == "sequential") return Composition::kSequential;
  if (text == "conditional") return Composition::kConditional;
  return std::nullopt;
}

void CompositionRequest::validate() const {
  if (text::trim(seed.text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "composition request has an empty seed");
  }
  require_slots(*this);
}

std::string describe_constraint(const ConstraintSpec& spec) {
  const std::string& kind = spec.kind();
  if (spec.mode() == Mode::kSoft) return spec.string_param("description");
  if (kind == "include_keywords") return "include the keywords " + quoted_list(spec.list_param("keywords"));
  if (kind == "keyword_frequency") {
    return "use the word \"" + spec.string_param("word") + "\" " + relation_phrase(spec) + " " +
           times(spec.int_param("N"));
  }
  if (kind == "forbidden_words") return "do not use the words " + quoted_list(spec.list_param("keywords"));
  if (kind == "letter_frequency") {
    return "use the letter \"" + spec.string_param("letter") + "\" " + relation_phrase(spec) + " " +
           times(spec.int_param("N"));
  }
  if (kind == "response_language") {
    return "respond only in " + language_name(spec.string_param("language"));
  }
  if (kind == "number_paragraphs") {
    return "write exactly " + std::to_string(spec.int_param("N")) +
           " paragraphs separated by the markdown divider ***";
  }
  if (kind == "number_words") return "answer in " + relation_phrase(spec) + " words";
  if (kind == "number_sentences") return "answer in " + relation_phrase(spec) + " sentences";
  if (kind == "paragraphs_first_word") {
    return "write exactly " + std::to_string(spec.int_param("N")) +
           " paragraphs separated by blank lines with paragraph " +
           std::to_string(spec.int_param("i")) + " starting with the word \"" +
           spec.string_param("word") + "\"";
  }
  if (kind == "postscript") {
    return "add a postscript at the end starting with " + spec.string_param("marker");
  }
  if (kind == "number_placeholders") {
    return "include at least " + std::to_string(spec.int_param("N")) +
           " placeholders in square brackets such as [address]";
  }
  if (kind == "number_bullets") {
    return "use exactly " + std::to_string(spec.int_param("N")) +
           " markdown bullet points such as * This is a point.";
  }
  if (kind == "title") return "include a title wrapped in double angular brackets such as <<poem of joy>>";
  if (kind == "choose_from") {
    return "answer with one of the following options: " + quoted_list(spec.list_param("options"));
  }
  if (kind == "min_highlighted") {
    return "highlight at least " + std::to_string(spec.int_param("N")) +
           " sections with markdown such as *highlighted section*";
  }
  if (kind == "multiple_sections") {
    const std::string& splitter = spec.string_param("splitter");
    return "organize the response into " + std::to_string(spec.int_param("N")) +
           " sections each beginning with \"" + splitter + " X\"";
  }
  if (kind == "json_format") return "wrap the entire output in JSON format";
  if (kind == "repeat_prompt") return "repeat the request without change before giving the answer";
  if (kind == "two_responses") {
    return "give two different responses separated by six asterisk symbols ******";
  }
  if (kind == "all_uppercase") return "write the entire response in English capital letters only";
  if (kind == "all_lowercase") return "write the entire response in English lowercase letters only";
  if (kind == "capital_word_frequency") {
    return "use words in all capital letters " + relation_phrase(spec) + " " +
           times(spec.int_param("N"));
  }
  if (kind == "end_checker") {
    return "end the response with the exact phrase \"" + spec.string_param("phrase") + "\"";
  }
  if (kind == "quotation") return "wrap the entire response in double quotation marks";
  if (kind == "no_commas") return "do not use any commas";
  throw Error(ErrorCode::kUnknownKind, "no description for kind '" + kind + "'");
}

InstructionRecord compose_template(const CompositionRequest& request) {
  request.validate();
  std::vector<std::string> parts;
  std::vector<LogicNode> leaves;
  for (const ConstraintSpec& spec : request.constraints) {
    parts.push_back(describe_constraint(spec));
    leaves.push_back(LogicNode::leaf(spec));
  }
  std::string sentence;
  std::optional<LogicNode> tree;
  switch (request.structure) {
    case Composition::kParallel:
      for (std::size_t i = 0; i < parts.size(); ++i) sentence += (i ? " and " : "") + parts[i];
      sentence = capitalize(sentence) + ".";
      tree = LogicNode::parallel(std::move(leaves));
      break;
    case Composition::kSequential:
      sentence = "First, " + parts[0];
      for (std::size_t i = 1; i + 1 < parts.size(); ++i) sentence += ", then " + parts[i];
      sentence += (parts.size() > 2 ? ", finally " : ", then ") + parts.back() + ".";
      tree = LogicNode::sequential(std::move(leaves));
      break;
    case Composition::kConditional:
      sentence = "If you " + parts[0] + ", " + parts[1] + "; else, " + parts[2] + ".";
      tree = LogicNode::conditional(std::move(leaves[0]), std::move(leaves[1]),
                                    std::move(leaves[2]));
      break;
  }
  std::string instruction(text::trim(request.seed.text));
  instruction += " " + sentence;
  return make_record(std::move(instruction), std::move(*tree),
                     std::string(to_string(request.seed.source)));
}

std::vector<std::string> default_taxonomy() {
  std::vector<std::string> lines;
  for (const KindInfo& info : soft_kinds()) {
    lines.push_back(std::string(info.label) + ": " + std::string(info.definition));
  }
  return lines;
}

std::string build_llm_prompt(const SeedQuestion& seed, std::span<const std::string> taxonomy) {
  if (taxonomy.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "composition prompt needs a non-empty taxonomy");
  }
  std::ostringstream out;
  out << "/* Task Description */\n"
      << "1. I currently have a seed question, but the seed questions are relatively simple. To "
         "make the instructions more complex, I want you to identify and return three "
         "composition constraints that can be added to the seed question.\n"
      << "2. I will provide [Seed Question] and [Constraint References], and you can use these "
         "references to propose the composition constraint that would increase the difficulty "
         "of the seed question.\n"
      << "3. You may choose one or more constraints from the [Constraint References] list, and "
         "combine them using the following composition rules.\n"
      << "4. Do not modify or rewrite the seed question. Your task is only to generate the new "
         "composite constraint that can be added to it.\n"
      << "5. Return the added constraint(s) in the JSON format described below, including all "
         "sub-constraints and their logical composition types.\n"
      << "6. Do not return anything else. No explanation, no reformulated question, no "
         "analysis---only the JSON structure.\n\n"
      << "/* Logical Composition Types */\n"
      << "And: The output is required to satisfy multiple constraints simultaneously. Template: "
         "C1 and C2 and C3. Example: summarize the news in bullet points and within 100 words.\n"
      << "Chain: The output is required to complete multiple tasks sequentially, each with its "
         "own constraints. Template: first C1, then C2, finally C3. Example: introduce \"Mona "
         "Lisa\": year of creation, then background, then impact.\n"
      << "Selection: The output is required to select different branches according to "
         "conditions, fulfilling the constraints of the corresponding branch. Template: if C1 "
         "then C2 otherwise C3. Example: if the painting has an animal, describe it in Chinese; "
         "otherwise, give year, background, and impact.\n\n"
      << "/* JSON Output Format */\n"
      << "Return\n"
      << "{ \"composite_constraints\": [ ... ] }\n"
      << "where each element contains a \"composite_constraint\" with fields \"type\": "
         "\"<And/Chain/Selection>\" and \"sub_constraints\" (\"c1\", \"c2\", \"c3\") each holding "
         "a \"constraint\" string that specifies one atomic constraint.\n\n"
      << "/* Constraint References */\n";
  for (std::size_t i = 0; i < taxonomy.size(); ++i) {
    out << (i + 1) << ". " << taxonomy[i] << "\n";
  }
  out << "\n/* Seed Question */\n"
      << "[Seed Question]: " << seed.text << "\n\n"
      << "/* Modified Question */\n"
      << "[Modified Question]: (the seed question plus one of the generated composite "
         "constraints)\n";
  return out.str();
}

std::vector<CompositionRequest> parse_composition_reply(std::string_view reply,
                                                        const SeedQuestion& seed) {
  bool saw_object = false;
  for (std::size_t start = reply.find('{'); start != std::string_view::npos;
       start = reply.find('{', start + 1)) {
    auto candidate = balanced_object_at(reply, start);
    if (!candidate) break;
    ordered_json doc = ordered_json::parse(*candidate, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) continue;
    saw_object = true;
    if (!doc.contains("composite_constraints")) continue;
    const ordered_json& list = doc["composite_constraints"];
    if (!list.is_array()) {
      throw Error(ErrorCode::kSchema, "\"composite_constraints\" must be an array");
    }
    std::vector<CompositionRequest> requests;
    for (std::size_t i = 0; i < list.size(); ++i) {
      requests.push_back(
          request_from_json(list[i], seed, "composite_constraints/" + std::to_string(i)));
    }
    if (requests.empty()) throw Error(ErrorCode::kSchema, "\"composite_constraints\" is empty");
    return requests;
  }
  throw Error(ErrorCode::kSchema, saw_object
                                      ? "reply JSON has no \"composite_constraints\" key"
                                      : "no JSON object found in the reply");
}

std::string render_composition_reply(std::span<const CompositionRequest> requests) {
  ordered_json list = ordered_json::array();
  for (const CompositionRequest& request : requests) {
    ordered_json subs = ordered_json::object();
    for (const ConstraintSpec& spec : request.constraints) {
      ordered_json sub = {{"constraint", describe_constraint(spec)}};
      if (spec.mode() == Mode::kSoft) {
        sub["type"] = std::string(spec.info().label);
      } else {
        sub["kind"] = spec.kind();
        sub["params"] = ordered_json::parse(detail::params_to_json(spec.params()).dump());
      }
      subs[spec.id()] = std::move(sub);
    }
    list.push_back({{"composite_constraint",
                     {{"type", std::string(reply_type(request.structure))},
                      {"sub_constraints", std::move(subs)}}}});
  }
  return ordered_json{{"composite_constraints", std::move(list)}}.dump(2);
}

ConstraintSpec sample_constraint(std::string_view kind, std::string id, std::mt19937_64& rng) {
  static constexpr std::string_view kWords[] = {"innovation", "history", "community", "balance",
                                                "journey",    "future",  "energy",    "design"};
  static constexpr std::string_view kRelations[] = {"at_least", "around", "at_most", "exactly"};
  static constexpr std::string_view kBounds[] = {"at_least", "at_most"};
  static constexpr std::string_view kLanguages[] = {"en", "fr", "de", "es", "ru", "zh", "ar"};
  static constexpr std::string_view kFirstWords[] = {"However", "First", "Finally", "Moreover",
                                                     "Overall"};
  static constexpr std::string_view kMarkers[] = {"P.S.", "P.P.S"};
  static constexpr std::string_view kSplitters[] = {"Section", "SECTION", "Part"};
  static constexpr std::string_view kEndings[] = {"Is there anything else I can help with?",
                                                  "Let me know if you have additional questions.",
                                                  "That is all."};
  static constexpr std::int64_t kWordCounts[] = {50, 100, 150, 200, 300};

  auto word = [&] { return std::string(pick<std::string_view>(kWords, rng)); };
  auto two_words = [&] {
    std::vector<std::string> out{word()};
    if (rng() % 2 == 0) {
      std::string second = word();
      if (second != out[0]) out.push_back(second);
    }
    return out;
  };
  auto relation = [&](std::span<const std::string_view> from) {
    return std::string(pick<std::string_view>(from, rng));
  };

  const KindInfo& info = kind_info(kind);
  Params p;
  if (info.mode == Mode::kSoft) {
    p["description"] = std::string(soft_description_bank().at(info.name));
  } else if (kind == "include_keywords" || kind == "forbidden_words") {
    p["keywords"] = two_words();
  } else if (kind == "keyword_frequency") {
    p["word"] = word();
    p["N"] = uniform(1, 4, rng);
    p["relation"] = relation(kBounds);
  } else if (kind == "letter_frequency") {
    p["letter"] = std::string(1, static_cast<char>('a' + rng() % 26));
    p["N"] = uniform(2, 10, rng);
    p["relation"] = relation(kRelations);
  } else if (kind == "response_language") {
    p["language"] = std::string(pick<std::string_view>(kLanguages, rng));
  } else if (kind == "number_paragraphs") {
    p["N"] = uniform(2, 5, rng);
  } else if (kind == "number_words") {
    p["N"] = pick<std::int64_t>(kWordCounts, rng);
    p["relation"] = relation(kRelations);
  } else if (kind == "number_sentences") {
    p["N"] = uniform(3, 10, rng);
    p["relation"] = relation(kRelations);
  } else if (kind == "paragraphs_first_word") {
    const std::int64_t n = uniform(2, 4, rng);
    p["N"] = n;
    p["i"] = uniform(1, n, rng);
    p["word"] = std::string(pick<std::string_view>(kFirstWords, rng));
  } else if (kind == "postscript") {
    p["marker"] = std::string(pick<std::string_view>(kMarkers, rng));
  } else if (kind == "number_placeholders" || kind == "min_highlighted") {
    p["N"] = uniform(1, 3, rng);
  } else if (kind == "number_bullets") {
    p["N"] = uniform(2, 5, rng);
  } else if (kind == "choose_from") {
    p["options"] = std::vector<std::string>{"My answer is yes.", "My answer is no.",
                                            "My answer is maybe."};
  } else if (kind == "multiple_sections") {
    p["N"] = uniform(2, 4, rng);
    p["splitter"] = std::string(pick<std::string_view>(kSplitters, rng));
  } else if (kind == "capital_word_frequency") {
    p["N"] = uniform(2, 5, rng);
    p["relation"] = relation(kRelations);
  } else if (kind == "end_checker") {
    p["phrase"] = std::string(pick<std::string_view>(kEndings, rng));
  }
  return ConstraintSpec(std::move(id), std::string(kind), std::move(p));
}

std::vector<InstructionRecord> build_template_records(std::span<const SeedQuestion> seeds,
                                                     const TemplateBuildOptions& options) {
  if (options.structures.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "template build needs at least one structure");
  }
  if (options.parallel_width < 2) {
    throw Error(ErrorCode::kInvalidArgument, "parallel_width must be >= 2");
  }
  if (!(options.soft_fraction >= 0.0 && options.soft_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "soft_fraction must lie in [0, 1]");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const auto hard = hard_kinds();
  const auto soft = soft_kinds();
  std::vector<InstructionRecord> records;
  std::size_t counter = 0;
  for (const SeedQuestion& seed : seeds) {
    for (std::size_t r = 0; r < options.records_per_seed; ++r, ++counter) {
      const Composition structure = options.structures[counter % options.structures.size()];
      const std::size_t slots =
          structure == Composition::kConditional ? 3 : options.parallel_width;
      CompositionRequest request{seed, structure, {}};
      std::set<std::string_view> used;
      while (request.constraints.size() < slots) {
        const bool use_soft = options.soft_fraction > 0.0 && coin(rng) < options.soft_fraction;
        const KindInfo& info = use_soft ? pick<KindInfo>(soft, rng) : pick<KindInfo>(hard, rng);
        if (!used.insert(info.name).second) continue;
        request.constraints.push_back(sample_constraint(
            info.name, "c" + std::to_string(request.constraints.size() + 1), rng));
      }
      records.push_back(compose_template(request));
    }
  }
  return records;
}

LlmBuildResult build_llm_records(std::span<const SeedQuestion> seeds, const ChatClient& client,
                                 std::size_t concurrency) {
  const std::vector<std::string> taxonomy = default_taxonomy();
  struct Slot {
    std::vector<InstructionRecord> records;
    std::string warning;
  };
  std::vector<Slot> slots(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        const std::string reply = client.complete(build_llm_prompt(seeds[i], taxonomy));
        for (const CompositionRequest& request : parse_composition_reply(reply, seeds[i])) {
          slots[i].records.push_back(compose_template(request));
        }
      } catch (const Error& e) {
        slots[i].records.clear();
        slots[i].warning = "seed " + std::to_string(i + 1) + ": " + e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(concurrency, seeds.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& thread : pool) thread.join();

  LlmBuildResult result;
  for (Slot& slot : slots) {
    for (auto& record : slot.records) result.records.push_back(std::move(record));
    if (!slot.warning.empty()) result.warnings.push_back(std::move(slot.warning));
  }
  return result;
}

DatasetStats dataset_stats(std::span<const InstructionRecord> records) {
  StatsAccumulator acc;
  for (const InstructionRecord& record : records) acc.add(record);
  return std::move(acc.stats());
}

DatasetStats dataset_stats(std::istream& jsonl) {
  StatsAccumulator acc;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(jsonl, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      acc.add(parse_record(line));
    } catch (const Error& e) {
      ++acc.stats().malformed_lines;
      acc.stats().warnings.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return std::move(acc.stats());
}

std::string format_stats_tsv(const DatasetStats& stats) {
  std::ostringstream out;
  out << "structure\tinstructions\tconstraint_kinds\ttotal_constraints\n";
  auto row = [&](const char* name, const StructureStats& s) {
    out << name << '\t' << s.instructions << '\t' << s.constraint_kinds << '\t'
        << s.total_constraints << '\n';
  };
  row("parallel", stats.parallel);
  row("sequential", stats.sequential);
  row("conditional", stats.conditional);
  return out.str();
}

std::string format_stats_json(const DatasetStats& stats) {
  auto row = [](const StructureStats& s) {
    return json{{"instructions", s.instructions},
                {"constraint_kinds", s.constraint_kinds},
                {"total_constraints", s.total_constraints}};
  };
  json out = {{"parallel", row(stats.parallel)},
              {"sequential", row(stats.sequential)},
              {"conditional", row(stats.conditional)},
              {"nested_records", stats.nested_records},
              {"malformed_lines", stats.malformed_lines}};
  return out.dump();
}

}  // namespace lsr
