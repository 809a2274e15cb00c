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

// Binary verification of hard constraints.
//
// verify() is pure and deterministic. A malformed spec (unknown kind, bad
// param) raises lsr::Error; it is never reported as an unsatisfied verdict.

#pragma once

#include <string>
#include <string_view>

#include "lsr/constraint_model.hpp"

namespace lsr {

struct Verdict {
  int satisfied = 0;  // 0 or 1
  std::string detail;

  static Verdict pass(std::string detail = "ok") { return {1, std::move(detail)}; }
  static Verdict fail(std::string detail) { return {0, std::move(detail)}; }
};

// Decides whether a response is written in a given language.
class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  // Throws Error(kInvalidArgument) for a language code it does not know.
  virtual bool is_language(std::string_view text, std::string_view language) const = 0;
};

// Dominant-script heuristic: counts letters per script (Latin, CJK,
// Cyrillic, Arabic) and compares the winner with the script of the target
// language code. Cannot tell apart languages sharing a script.
class ScriptLanguageDetector final : public LanguageDetector {
 public:
  bool is_language(std::string_view text, std::string_view language) const override;
};

const LanguageDetector& default_language_detector();

struct VerifyOptions {
  const LanguageDetector* language_detector = nullptr;  // null: default
};

Verdict verify(const ConstraintSpec& spec, std::string_view response,
               std::string_view instruction = {}, const VerifyOptions& options = {});

Verdict check_keywords_family(const ConstraintSpec& spec, std::string_view response,
                              const VerifyOptions& options = {});
Verdict check_length_family(const ConstraintSpec& spec, std::string_view response);
Verdict check_format_family(const ConstraintSpec& spec, std::string_view response);
Verdict check_case_combo_edge_family(const ConstraintSpec& spec, std::string_view response,
                                     std::string_view instruction);

// Counters exposed for diagnostics and tests.
std::size_t count_placeholders(std::string_view response);
std::size_t count_bullets(std::string_view response);
std::size_t count_highlighted(std::string_view response);
std::size_t count_capital_words(std::string_view response);

}  // namespace lsr
