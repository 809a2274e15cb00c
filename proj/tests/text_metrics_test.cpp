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

#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "lsr/text_metrics.hpp"

namespace lsr::text {
namespace {

using Paragraphs = std::vector<std::string>;

TEST_CASE("count_words") {
  CHECK(count_words("") == 0);
  CHECK(count_words("one two  three") == 3);
  CHECK(count_words("a-b c's \xE2\x80\x94 d") == 3);  // the em dash run has no alphanumeric
  CHECK(count_words("... !!! ---") == 0);
  CHECK(count_words("caf\xC3\xA9 na\xC3\xAFve") == 2);
  CHECK(count_words("\xD0\xBF\xD1\x80\xD0\xB8\xD0\xB2\xD0\xB5\xD1\x82 \xD0\xBC\xD0\xB8\xD1\x80") == 2);
  CHECK(count_words("x\ty\nz\r\nw") == 4);
}

TEST_CASE("count_words ignores surrounding and repeated whitespace") {
  std::mt19937 rng(11);
  const std::vector<std::string> tokens = {"alpha", "b2", "--", "c'd", "e.f", "!", "42"};
  const std::vector<std::string> gaps = {" ", "  ", "\t", "\n", " \n\t "};
  for (int trial = 0; trial < 200; ++trial) {
    std::string tight, loose;
    const int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      const std::string& tok = tokens[rng() % tokens.size()];
      tight += (i ? " " : "") + tok;
      loose += gaps[rng() % gaps.size()] + tok;
    }
    loose += gaps[rng() % gaps.size()];
    CHECK(count_words(tight) == count_words(loose));
  }
}

TEST_CASE("count_sentences") {
  CHECK(count_sentences("") == 0);
  CHECK(count_sentences("   ") == 0);
  CHECK(count_sentences("Hi. Bye!") == 2);
  CHECK(count_sentences("Wait... what?! ok") == 3);
  CHECK(count_sentences("No terminator") == 1);
  CHECK(count_sentences("!!! ???") == 0);
  CHECK(count_sentences("One. Two. Three.") == 3);
}

TEST_CASE("appending text never removes sentences") {
  const std::vector<std::string> heads = {"Hi.", "Wait... what?!", "A. B. C!", "Odd?"};
  const std::vector<std::string> tails = {"", "x", "Done.", "and more", "!!"};
  for (const auto& a : heads) {
    for (const auto& b : tails) CHECK(count_sentences(a + " " + b) >= count_sentences(a));
  }
}

TEST_CASE("split_paragraphs") {
  CHECK(split_paragraphs("a\n***\nb", Divider::kMarkdownStars) == Paragraphs{"a", "b"});
  CHECK(split_paragraphs("a\n\nb\n\n\nc", Divider::kBlankLine) == Paragraphs{"a", "b", "c"});
  CHECK(split_paragraphs("***\nx\n***", Divider::kMarkdownStars) == Paragraphs{"x"});
  CHECK(split_paragraphs("", Divider::kBlankLine).empty());
  CHECK(split_paragraphs("a\n \t \nb", Divider::kBlankLine) == Paragraphs{"a", "b"});
  CHECK(split_paragraphs("line one\nline two", Divider::kBlankLine) ==
        Paragraphs{"line one\nline two"});
  CHECK(split_paragraphs("a\r\n\r\nb", Divider::kBlankLine) == Paragraphs{"a", "b"});
  // The stars divider ignores blank lines and vice versa.
  CHECK(split_paragraphs("a\n\nb", Divider::kMarkdownStars).size() == 1);
  CHECK(split_paragraphs("a\n***\nb", Divider::kBlankLine).size() == 1);
}

TEST_CASE("split_paragraphs never yields empty paragraphs") {
  std::mt19937 rng(5);
  const std::vector<std::string> pieces = {"a", "\n", "\n\n", "***", "\n***\n", " ", "bc"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    for (int i = 0; i < 10; ++i) text += pieces[rng() % pieces.size()];
    for (Divider d : {Divider::kBlankLine, Divider::kMarkdownStars}) {
      for (const std::string& p : split_paragraphs(text, d)) {
        CHECK_FALSE(trim(p).empty());
        CHECK(p == trim(p));
      }
    }
  }
}

TEST_CASE("compute_stats") {
  const TextStats stats = compute_stats("Hello there.\n\nSecond one!");
  CHECK(stats.words == 4);
  CHECK(stats.sentences == 2);
  CHECK(stats.paragraphs == Paragraphs{"Hello there.", "Second one!"});
  CHECK(stats.lines.size() == 3);
}

TEST_CASE("count_whole_word") {
  CHECK(count_whole_word("AI and ai and Ai", "ai") == 3);
  CHECK(count_whole_word("maintain", "ai") == 0);
  CHECK(count_whole_word("data_set data", "data") == 1);
  CHECK(count_whole_word("New York, new york!", "new york") == 2);
  CHECK(count_whole_word("aaa", "aa") == 0);
}

TEST_CASE("relations") {
  CHECK(satisfies(Relation::kAtLeast, 5, 5));
  CHECK_FALSE(satisfies(Relation::kAtLeast, 4, 5));
  CHECK(satisfies(Relation::kAtMost, 5, 5));
  CHECK_FALSE(satisfies(Relation::kAtMost, 6, 5));
  CHECK(satisfies(Relation::kExactly, 5, 5));
  CHECK_FALSE(satisfies(Relation::kExactly, 4, 5));
  // around: +/-10% rounded outward, never narrower than +/-1
  CHECK(around_band(100) == 10);
  CHECK(around_band(15) == 2);
  CHECK(around_band(3) == 1);
  CHECK(around_band(0) == 1);
  CHECK(satisfies(Relation::kAround, 110, 100));
  CHECK_FALSE(satisfies(Relation::kAround, 111, 100));
  CHECK(satisfies(Relation::kAround, 2, 3));
  CHECK_FALSE(satisfies(Relation::kAround, 1, 3));
}

}  // namespace
}  // namespace lsr::text
