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

#include "lsr/verifiers.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <initializer_list>

#include "json.hpp"
#include "lsr/text_metrics.hpp"
#include "utf8.hpp"

namespace lsr {
namespace {

using text::trim;

std::string quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

std::string relation_text(Relation relation, std::int64_t n) {
  return std::string(to_string(relation)) + " " + std::to_string(n);
}

Verdict counted(std::string_view what, std::size_t observed, Relation relation, std::int64_t n) {
  std::string detail = what.empty() ? std::string() : std::string(what) + ": ";
  detail += "observed " + std::to_string(observed) + ", required " + relation_text(relation, n);
  if (relation == Relation::kAround) {
    detail += " (+/-" + std::to_string(text::around_band(n)) + ")";
  }
  return text::satisfies(relation, static_cast<std::int64_t>(observed), n) ? Verdict::pass(detail)
                                                                          : Verdict::fail(detail);
}

[[noreturn]] void wrong_family(const ConstraintSpec& spec, std::string_view family) {
  throw Error(ErrorCode::kInvalidArgument,
              "kind '" + spec.kind() + "' is not handled by the " + std::string(family) +
                  " checks");
}

bool ascii_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string_view strip_punct(std::string_view token) {
  while (!token.empty() && !ascii_alnum(token.front()) &&
         static_cast<unsigned char>(token.front()) < 0x80) {
    token.remove_prefix(1);
  }
  while (!token.empty() && !ascii_alnum(token.back()) &&
         static_cast<unsigned char>(token.back()) < 0x80) {
    token.remove_suffix(1);
  }
  return token;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

// --- language ---------------------------------------------------------------

enum class Script { kLatin, kCjk, kCyrillic, kArabic, kNone };

Script script_of(char32_t cp) {
  if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) return Script::kLatin;
  if (cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7) return Script::kLatin;
  if (cp >= 0x1E00 && cp <= 0x1EFF) return Script::kLatin;
  if (cp >= 0x400 && cp <= 0x52F) return Script::kCyrillic;
  if ((cp >= 0x600 && cp <= 0x6FF) || (cp >= 0x750 && cp <= 0x77F) ||
      (cp >= 0xFB50 && cp <= 0xFDFF) || (cp >= 0xFE70 && cp <= 0xFEFF)) {
    return Script::kArabic;
  }
  if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
      (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0xAC00 && cp <= 0xD7AF) ||
      (cp >= 0x1100 && cp <= 0x11FF) || (cp >= 0xF900 && cp <= 0xFAFF)) {
    return Script::kCjk;
  }
  return Script::kNone;
}

Script script_for_language(std::string_view code) {
  static constexpr std::string_view kLatin[] = {
      "en", "fr", "de", "es", "it", "pt", "nl", "sv", "da", "no", "nb", "fi", "pl", "cs",
      "sk", "ro", "hu", "tr", "id", "ms", "vi", "ca", "hr", "sl", "et", "lv", "lt", "sw",
      "tl", "af", "sq", "is", "ga", "cy", "eu", "gl"};
  static constexpr std::string_view kCyrillic[] = {"ru", "uk", "bg", "sr", "be", "kk", "mk",
                                                   "mn", "ky", "tg"};
  static constexpr std::string_view kArabic[] = {"ar", "fa", "ur", "ps", "ug", "ku"};
  static constexpr std::string_view kCjk[] = {"zh", "ja", "ko"};
  const std::string lower = text::ascii_lower(code);
  auto in = [&](std::span<const std::string_view> codes) {
    return std::find(codes.begin(), codes.end(), lower) != codes.end();
  };
  if (in(kLatin)) return Script::kLatin;
  if (in(kCyrillic)) return Script::kCyrillic;
  if (in(kArabic)) return Script::kArabic;
  if (in(kCjk)) return Script::kCjk;
  throw Error(ErrorCode::kInvalidArgument, "unsupported language code '" + std::string(code) + "'");
}

// --- case / combination helpers --------------------------------------------

bool has_lowercase(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const char32_t cp = utf8::next(s, pos);
    if ((cp >= U'a' && cp <= U'z') || (cp >= 0xDF && cp <= 0xFF && cp != 0xF7)) return true;
  }
  return false;
}

bool has_uppercase(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    const char32_t cp = utf8::next(s, pos);
    if ((cp >= U'A' && cp <= U'Z') || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)) return true;
  }
  return false;
}

struct StarRun {
  std::size_t begin;
  std::size_t length;
};

std::vector<StarRun> star_runs(std::string_view s) {
  std::vector<StarRun> runs;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '*') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && s[j] == '*') ++j;
    runs.push_back({i, j - i});
    i = j;
  }
  return runs;
}


}  // namespace

// ---------------------------------------------------------------------------

bool ScriptLanguageDetector::is_language(std::string_view text_in, std::string_view language) const {
  const Script target = script_for_language(language);
  std::array<std::size_t, 4> counts{};
  std::size_t pos = 0;
  while (pos < text_in.size()) {
    const Script script = script_of(utf8::next(text_in, pos));
    if (script != Script::kNone) ++counts[static_cast<std::size_t>(script)];
  }
  const auto best = std::max_element(counts.begin(), counts.end());
  if (*best == 0) return false;
  if (std::count(counts.begin(), counts.end(), *best) > 1) return false;
  return static_cast<Script>(best - counts.begin()) == target;
}

const LanguageDetector& default_language_detector() {
  static const ScriptLanguageDetector detector;
  return detector;
}

std::size_t count_placeholders(std::string_view response) {
  std::size_t count = 0;
  std::size_t pos = response.find('[');
  while (pos != std::string_view::npos) {
    const std::size_t close = response.find_first_of("[]\n", pos + 1);
    if (close != std::string_view::npos && response[close] == ']') {
      if (!trim(response.substr(pos + 1, close - pos - 1)).empty()) ++count;
      pos = response.find('[', close + 1);
    } else {
      pos = close == std::string_view::npos ? close : response.find('[', close);
    }
  }
  return count;
}

std::size_t count_bullets(std::string_view response) {
  std::size_t count = 0;
  for (std::string_view line : text::split_lines(response)) {
    if (ltrim(line).starts_with("* ")) ++count;
  }
  return count;
}

std::size_t count_highlighted(std::string_view response) {
  std::size_t count = 0;
  for (std::string_view line : text::split_lines(response)) {
    std::string_view body = ltrim(line);
    if (body.starts_with("* ")) body.remove_prefix(2);
    std::size_t i = 0;
    while (i < body.size()) {
      if (body[i] != '*') {
        ++i;
        continue;
      }
      if (i + 1 < body.size() && body[i + 1] == '*') {
        const std::size_t close = body.find("**", i + 2);
        if (close != std::string_view::npos) {
          std::string_view inner = body.substr(i + 2, close - i - 2);
          if (inner.find('*') == std::string_view::npos && !trim(inner).empty()) {
            ++count;
            i = close + 2;
            continue;
          }
        }
      }
      const std::size_t close = body.find('*', i + 1);
      if (close != std::string_view::npos && !trim(body.substr(i + 1, close - i - 1)).empty()) {
        ++count;
        i = close + 1;
        continue;
      }
      ++i;
    }
  }
  return count;
}

std::size_t count_capital_words(std::string_view response) {
  std::size_t count = 0;
  for (std::string_view token : text::words(response)) {
    token = strip_punct(token);
    const auto letters = std::count_if(token.begin(), token.end(), [](char c) {
      return std::isalpha(static_cast<unsigned char>(c));
    });
    if (letters >= 2 && !has_lowercase(token)) ++count;
  }
  return count;
}

Verdict check_keywords_family(const ConstraintSpec& spec, std::string_view response,
                              const VerifyOptions& options) {
  const std::string& kind = spec.kind();
  if (kind == "include_keywords") {
    std::vector<std::string> missing;
    for (const std::string& keyword : spec.list_param("keywords")) {
      if (text::count_whole_word(response, keyword) == 0) missing.push_back(quote(keyword));
    }
    if (missing.empty()) return Verdict::pass("all keywords present");
    std::string detail = "missing keywords:";
    for (const auto& m : missing) detail += " " + m;
    return Verdict::fail(detail);
  }
  if (kind == "forbidden_words") {
    std::vector<std::string> found;
    for (const std::string& word : spec.list_param("keywords")) {
      if (text::count_whole_word(response, word) > 0) found.push_back(quote(word));
    }
    if (found.empty()) return Verdict::pass("no forbidden words");
    std::string detail = "forbidden words present:";
    for (const auto& f : found) detail += " " + f;
    return Verdict::fail(detail);
  }
  if (kind == "keyword_frequency") {
    const std::string& word = spec.string_param("word");
    return counted("occurrences of " + quote(word), text::count_whole_word(response, word),
                   spec.relation(), spec.int_param("N"));
  }
  if (kind == "letter_frequency") {
    const char letter = static_cast<char>(std::tolower(spec.string_param("letter")[0]));
    const std::string lower = text::ascii_lower(response);
    const auto n = static_cast<std::size_t>(std::count(lower.begin(), lower.end(), letter));
    return counted(std::string("letter '") + letter + "'", n, spec.relation(), spec.int_param("N"));
  }
  if (kind == "response_language") {
    const LanguageDetector& detector =
        options.language_detector ? *options.language_detector : default_language_detector();
    const std::string& language = spec.string_param("language");
    if (detector.is_language(response, language)) return Verdict::pass("language " + language);
    return Verdict::fail("response is not predominantly in '" + language + "'");
  }
  wrong_family(spec, "keywords");
}

Verdict check_length_family(const ConstraintSpec& spec, std::string_view response) {
  const std::string& kind = spec.kind();
  if (kind == "number_paragraphs") {
    const auto n = text::split_paragraphs(response, text::Divider::kMarkdownStars).size();
    return counted("*** paragraphs", n, Relation::kExactly, spec.int_param("N"));
  }
  if (kind == "number_words") {
    return counted("words", text::count_words(response), spec.relation(), spec.int_param("N"));
  }
  if (kind == "number_sentences") {
    return counted("sentences", text::count_sentences(response), spec.relation(),
                   spec.int_param("N"));
  }
  if (kind == "paragraphs_first_word") {
    const auto paragraphs = text::split_paragraphs(response, text::Divider::kBlankLine);
    const std::int64_t n = spec.int_param("N");
    if (static_cast<std::int64_t>(paragraphs.size()) != n) {
      return Verdict::fail("paragraphs: observed " + std::to_string(paragraphs.size()) +
                           ", required exactly " + std::to_string(n));
    }
    const std::int64_t index = spec.int_param("i");
    const std::string& paragraph = paragraphs[static_cast<std::size_t>(index - 1)];
    const auto tokens = text::words(paragraph);
    const std::string first = tokens.empty() ? "" : text::ascii_lower(strip_punct(tokens.front()));
    const std::string expected = text::ascii_lower(strip_punct(spec.string_param("word")));
    if (first == expected) return Verdict::pass("paragraph " + std::to_string(index) + " ok");
    return Verdict::fail("paragraph " + std::to_string(index) + " starts with " + quote(first) +
                         ", required " + quote(expected));
  }
  wrong_family(spec, "length");
}

Verdict check_format_family(const ConstraintSpec& spec, std::string_view response) {
  const std::string& kind = spec.kind();
  if (kind == "postscript") {
    const std::string marker = text::ascii_lower(trim(spec.string_param("marker")));
    bool seen_body = false;
    for (std::string_view line : text::split_lines(response)) {
      const std::string_view stripped = trim(line);
      if (stripped.empty()) continue;
      if (seen_body && text::ascii_lower(stripped).starts_with(marker)) {
        return Verdict::pass("postscript found");
      }
      seen_body = true;
    }
    return Verdict::fail("no line after the body starts with " + quote(marker));
  }
  if (kind == "number_placeholders") {
    return counted("placeholders", count_placeholders(response), Relation::kAtLeast,
                   spec.int_param("N"));
  }
  if (kind == "number_bullets") {
    return counted("bullets", count_bullets(response), Relation::kExactly, spec.int_param("N"));
  }
  if (kind == "title") {
    std::size_t open = response.find("<<");
    while (open != std::string_view::npos) {
      const std::size_t close = response.find(">>", open + 2);
      if (close == std::string_view::npos) break;
      std::string_view inner = response.substr(open + 2, close - open - 2);
      if (inner.find('\n') == std::string_view::npos && !trim(inner).empty()) {
        return Verdict::pass("title <<" + std::string(inner) + ">>");
      }
      open = response.find("<<", open + 2);
    }
    return Verdict::fail("no <<title>> span");
  }
  if (kind == "choose_from") {
    const std::string_view answer = trim(response);
    for (const std::string& option : spec.list_param("options")) {
      if (answer == trim(option)) return Verdict::pass("chose " + quote(option));
    }
    return Verdict::fail("response is not one of the options");
  }
  if (kind == "min_highlighted") {
    return counted("highlighted sections", count_highlighted(response), Relation::kAtLeast,
                   spec.int_param("N"));
  }
  if (kind == "multiple_sections") {
    const std::string& splitter = spec.string_param("splitter");
    std::size_t sections = 0;
    for (std::string_view line : text::split_lines(response)) {
      const std::string_view body = ltrim(line);
      if (!body.starts_with(splitter)) continue;
      if (body.size() == splitter.size() ||
          !std::isalpha(static_cast<unsigned char>(body[splitter.size()]))) {
        ++sections;
      }
    }
    return counted("sections", sections, Relation::kExactly, spec.int_param("N"));
  }
  if (kind == "json_format") {
    const std::string_view body = trim(response);
    if (!body.empty() && nlohmann::json::accept(body)) return Verdict::pass("valid JSON");
    return Verdict::fail("response is not a single JSON document");
  }
  wrong_family(spec, "format");
}

Verdict check_case_combo_edge_family(const ConstraintSpec& spec, std::string_view response,
                                     std::string_view instruction) {
  const std::string& kind = spec.kind();
  if (kind == "repeat_prompt") {
    const std::string_view prompt = trim(spec.has("prompt") ? spec.string_param("prompt")
                                                            : instruction);
    if (prompt.empty()) {
      throw Error(ErrorCode::kMissingParam,
                  "constraint '" + spec.id() +
                      "' (repeat_prompt) needs the instruction text or a 'prompt' param");
    }
    const std::string_view body = trim(response);
    if (!body.starts_with(prompt)) return Verdict::fail("response does not begin with the request");
    if (trim(body.substr(prompt.size())).empty()) {
      return Verdict::fail("request repeated but no answer follows");
    }
    return Verdict::pass("request repeated");
  }
  if (kind == "two_responses") {
    const auto runs = star_runs(response);
    std::vector<StarRun> separators;
    for (const StarRun& run : runs) {
      if (run.length == 6) separators.push_back(run);
      if (run.length > 6) return Verdict::fail("asterisk run longer than six");
    }
    if (separators.size() != 1) {
      return Verdict::fail("separators: observed " + std::to_string(separators.size()) +
                           ", required exactly 1");
    }
    const std::string_view first = trim(response.substr(0, separators[0].begin));
    const std::string_view second = trim(response.substr(separators[0].begin + 6));
    if (first.empty() || second.empty()) return Verdict::fail("one of the responses is empty");
    if (first == second) return Verdict::fail("the two responses are identical");
    return Verdict::pass("two distinct responses");
  }
  if (kind == "all_uppercase") {
    return has_lowercase(response) ? Verdict::fail("lowercase letters present")
                                   : Verdict::pass("all uppercase");
  }
  if (kind == "all_lowercase") {
    return has_uppercase(response) ? Verdict::fail("uppercase letters present")
                                   : Verdict::pass("all lowercase");
  }
  if (kind == "capital_word_frequency") {
    return counted("all-capital words", count_capital_words(response), spec.relation(),
                   spec.int_param("N"));
  }
  if (kind == "end_checker") {
    const std::string_view phrase = trim(spec.string_param("phrase"));
    if (trim(response).ends_with(phrase)) return Verdict::pass("ends with the phrase");
    return Verdict::fail("response does not end with " + quote(phrase));
  }
  if (kind == "quotation") {
    const std::string_view body = trim(response);
    if (body.size() >= 2 && body.front() == '"' && body.back() == '"') {
      return Verdict::pass("wrapped in double quotes");
    }
    return Verdict::fail("response is not wrapped in double quotes");
  }
  if (kind == "no_commas") {
    const std::size_t commas =
        static_cast<std::size_t>(std::count(response.begin(), response.end(), ','));
    if (commas == 0) return Verdict::pass("no commas");
    return Verdict::fail("commas: observed " + std::to_string(commas) + ", required 0");
  }
  wrong_family(spec, "combination/case/start-end/punctuation");
}

Verdict verify(const ConstraintSpec& spec, std::string_view response, std::string_view instruction,
               const VerifyOptions& options) {
  switch (spec.family()) {
    case Family::kKeywords: return check_keywords_family(spec, response, options);
    case Family::kLength: return check_length_family(spec, response);
    case Family::kDetectableContent:
    case Family::kDetectableFormat: return check_format_family(spec, response);
    case Family::kCombination:
    case Family::kChangeCase:
    case Family::kStartEnd:
    case Family::kPunctuation: return check_case_combo_edge_family(spec, response, instruction);
    case Family::kSoft: break;
  }
  throw Error(ErrorCode::kInvalidArgument,
              "constraint '" + spec.id() + "' is soft (" + spec.kind() +
                  "); soft constraints are scored by a reward model, not verified");
}

}  // namespace lsr
