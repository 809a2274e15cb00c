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

#include "lsr/text_metrics.hpp"

#include <algorithm>
#include <cstdlib>

#include "utf8.hpp"

namespace lsr::text {
namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) || c == '_';
}

void append_paragraph(std::vector<std::string>& out, std::string& current) {
  std::string_view trimmed = trim(current);
  if (!trimmed.empty()) out.emplace_back(trimmed);
  current.clear();
}

}  // namespace

std::string_view trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return text.substr(begin, end - begin);
}

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string_view> words(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  std::size_t run_start = 0;
  bool in_run = false;
  bool run_has_alnum = false;
  while (pos < text.size()) {
    const std::size_t at = pos;
    const char32_t cp = utf8::next(text, pos);
    if (utf8::is_space(cp)) {
      if (in_run && run_has_alnum) out.push_back(text.substr(run_start, at - run_start));
      in_run = false;
      continue;
    }
    if (!in_run) {
      in_run = true;
      run_start = at;
      run_has_alnum = false;
    }
    run_has_alnum = run_has_alnum || utf8::is_alnum(cp);
  }
  if (in_run && run_has_alnum) out.push_back(text.substr(run_start));
  return out;
}

std::size_t count_words(std::string_view text) { return words(text).size(); }

std::size_t count_sentences(std::string_view text) {
  std::size_t count = 0;
  bool segment_has_content = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_terminator(text[i])) {
      while (i < text.size() && is_terminator(text[i])) ++i;
      if (segment_has_content) ++count;
      segment_has_content = false;
      continue;
    }
    if (!std::isspace(static_cast<unsigned char>(text[i]))) segment_has_content = true;
    ++i;
  }
  if (segment_has_content) ++count;
  return count;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> split_paragraphs(std::string_view text, Divider divider) {
  std::vector<std::string> out;
  std::string current;
  for (std::string_view line : split_lines(text)) {
    const std::string_view stripped = trim(line);
    const bool splits = divider == Divider::kMarkdownStars ? stripped == "***" : stripped.empty();
    if (splits) {
      append_paragraph(out, current);
      continue;
    }
    if (!current.empty()) current += '\n';
    current += line;
  }
  append_paragraph(out, current);
  return out;
}

TextStats compute_stats(std::string_view text, Divider divider) {
  TextStats stats;
  stats.words = count_words(text);
  stats.sentences = count_sentences(text);
  stats.paragraphs = split_paragraphs(text, divider);
  for (std::string_view line : split_lines(text)) stats.lines.emplace_back(line);
  return stats;
}

std::size_t count_whole_word(std::string_view haystack, std::string_view needle) {
  const std::string hay = ascii_lower(haystack);
  const std::string pattern = ascii_lower(trim(needle));
  if (pattern.empty()) return 0;
  std::size_t count = 0;
  std::size_t pos = hay.find(pattern);
  while (pos != std::string::npos) {
    const std::size_t end = pos + pattern.size();
    const bool left_ok = pos == 0 || !is_word_byte(hay[pos - 1]) || !is_word_byte(pattern.front());
    const bool right_ok =
        end == hay.size() || !is_word_byte(hay[end]) || !is_word_byte(pattern.back());
    if (left_ok && right_ok) {
      ++count;
      pos = hay.find(pattern, end);
    } else {
      pos = hay.find(pattern, pos + 1);
    }
  }
  return count;
}

std::int64_t around_band(std::int64_t n) { return std::max<std::int64_t>(1, (n + 9) / 10); }

bool satisfies(Relation relation, std::int64_t count, std::int64_t n) {
  switch (relation) {
    case Relation::kAtLeast: return count >= n;
    case Relation::kAtMost: return count <= n;
    case Relation::kExactly: return count == n;
    case Relation::kAround: return std::llabs(count - n) <= around_band(n);
  }
  return false;
}

}  // namespace lsr::text
