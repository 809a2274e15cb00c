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

// Counting primitives shared by the hard verifiers. Rules target
// space-delimited scripts; sentence splitting is terminator based and does
// not know about abbreviations.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/constraint_model.hpp"

namespace lsr::text {

enum class Divider { kBlankLine, kMarkdownStars };

struct TextStats {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::vector<std::string> paragraphs;
  std::vector<std::string> lines;
};

// Maximal non-whitespace runs that contain at least one alphanumeric
// code point.
std::vector<std::string_view> words(std::string_view text);
std::size_t count_words(std::string_view text);

// Segments closed by a run of '.', '!' or '?'; a trailing unterminated
// segment with visible content also counts.
std::size_t count_sentences(std::string_view text);

// Paragraphs are trimmed; empty ones are dropped.
std::vector<std::string> split_paragraphs(std::string_view text, Divider divider);

std::vector<std::string_view> split_lines(std::string_view text);

TextStats compute_stats(std::string_view text, Divider divider = Divider::kBlankLine);

std::string_view trim(std::string_view text);
std::string ascii_lower(std::string_view text);

// Occurrences of `needle` bounded by non-word characters on both sides,
// ASCII case-folded.
std::size_t count_whole_word(std::string_view haystack, std::string_view needle);

// "around" accepts |count - n| <= max(1, ceil(n / 10)).
bool satisfies(Relation relation, std::int64_t count, std::int64_t n);
std::int64_t around_band(std::int64_t n);

}  // namespace lsr::text
