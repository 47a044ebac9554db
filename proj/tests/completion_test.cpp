// Copyright 2026 The mqmkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <random>
#include <string>

#include "mqmkit/completion.hpp"
#include "mqmkit/prompting.hpp"
#include "test_support.hpp"

namespace mqmkit {
namespace {

using testing::make_segment;

TEST(ScoreCompletion, Examples) {
  EXPECT_EQ(parse_score_completion("95").numeric_score(), 95.0);
  EXPECT_EQ(parse_score_completion(" 79 (good translation)").numeric_score(), 79.0);
  EXPECT_EQ(parse_score_completion("Score: 87.5 points").numeric_score(), 87.5);
  EXPECT_EQ(parse_score_completion("0").numeric_score(), 0.0);
  EXPECT_EQ(parse_score_completion("100").numeric_score(), 100.0);
}

TEST(ScoreCompletion, InvalidKeepsRaw) {
  for (auto s : {"Score: 101", "-5", "no idea", "", "100.5"}) {
    auto p = parse_score_completion(s);
    EXPECT_EQ(p.kind, CompletionKind::kInvalid) << s;
    EXPECT_FALSE(p.numeric_score()) << s;
    EXPECT_TRUE(std::holds_alternative<std::monostate>(p.payload));
    EXPECT_EQ(p.raw, s);
  }
}

TEST(ClassCompletion, Examples) {
  EXPECT_EQ(parse_class_completion("very good").class_label(), 5);
  EXPECT_EQ(parse_class_completion("I think it is bad.").class_label(), 2);
  EXPECT_EQ(parse_class_completion("Very Bad").class_label(), 1);
  EXPECT_EQ(parse_class_completion("ok").class_label(), 3);
  EXPECT_EQ(parse_class_completion("excellent").class_label(), 0);
  EXPECT_EQ(parse_class_completion("excellent").kind, CompletionKind::kInvalid);
}

TEST(AutoMqmCompletion, SingleErrorWithOffsets) {
  const auto seg = make_segment("s", "1", "wrong translation here",
                                "Das ist eine falsche Übersetzung hier.");
  auto p = parse_automqm_completion("falsche Übersetzung - major/accuracy", seg);
  ASSERT_EQ(p.kind, CompletionKind::kErrorList);
  ASSERT_EQ(p.errors().size(), 1u);
  const auto& e = p.errors()[0];
  EXPECT_EQ(e.severity, Severity::kMajor);
  EXPECT_EQ(e.category, ErrorCategory::make("Accuracy"));
  EXPECT_EQ(e.side, TextSide::kCandidate);
  // "Das ist eine " is 13 bytes; "falsche Übersetzung" is 20 bytes (Ü is two).
  EXPECT_EQ(e.char_start, 13u);
  EXPECT_EQ(e.char_end, 33u);
  EXPECT_NO_THROW(validate_annotation(e, seg.candidate));
}

TEST(AutoMqmCompletion, NoErrorMarkers) {
  const auto seg = make_segment("s", "1", "a", "b");
  for (auto s : {"No errors", "no errors.", "  None ", "Errors: No errors", "no error"}) {
    auto p = parse_automqm_completion(s, seg);
    EXPECT_EQ(p.kind, CompletionKind::kNoErrors) << s;
    EXPECT_TRUE(p.errors().empty());
    EXPECT_EQ(score_annotations(p.errors()), 0.0);
  }
}

TEST(AutoMqmCompletion, TwoErrorsScoreDownstream) {
  const auto seg = make_segment("s", "1", "source", "x and y");
  auto p = parse_automqm_completion("x - major/accuracy; y - minor/fluency/punctuation", seg);
  ASSERT_EQ(p.errors().size(), 2u);
  EXPECT_EQ(p.errors()[1].category, ErrorCategory::make("Fluency", "Punctuation"));
  EXPECT_DOUBLE_EQ(score_annotations(p.errors()), 5.1);
}

TEST(AutoMqmCompletion, DropsMalformedItemsAndCountsThem) {
  const auto seg = make_segment("s", "1", "source", "alpha beta gamma");
  auto p = parse_automqm_completion("alpha - major/style; beta is wrong; gamma - critical", seg);
  ASSERT_EQ(p.errors().size(), 1u);
  EXPECT_EQ(p.diagnostics.items_total, 3u);
  EXPECT_EQ(p.diagnostics.items_dropped, 2u);
  EXPECT_EQ(p.diagnostics.dropped_items.size(), 2u);

  auto none = parse_automqm_completion("this makes no sense", seg);
  EXPECT_EQ(none.kind, CompletionKind::kInvalid);
  EXPECT_EQ(none.raw, "this makes no sense");
}

TEST(AutoMqmCompletion, Localization) {
  const auto seg = make_segment("s", "1", "The house is red.", "Das Haus das Haus ist rot.");
  auto p = parse_automqm_completion("das Haus - minor/fluency/grammar", seg);
  ASSERT_EQ(p.errors().size(), 1u);
  // Case-sensitive match wins over the earlier case-insensitive one.
  EXPECT_EQ(p.errors()[0].char_start, 9u);

  p = parse_automqm_completion("Das Haus - minor/fluency/grammar", seg);
  EXPECT_EQ(p.errors()[0].char_start, 0u);
  EXPECT_EQ(p.diagnostics.ambiguous_spans, 0u);

  p = parse_automqm_completion("ROT - minor/fluency/spelling", seg);
  EXPECT_EQ(p.errors()[0].char_start, 22u);
  EXPECT_EQ(p.errors()[0].span_text, "rot");

  p = parse_automqm_completion("Haus - minor/fluency/grammar", seg);
  EXPECT_EQ(p.errors()[0].char_start, 4u);
  EXPECT_EQ(p.diagnostics.ambiguous_spans, 1u);

  p = parse_automqm_completion("blau - major/accuracy/mistranslation", seg);
  ASSERT_EQ(p.errors().size(), 1u);
  EXPECT_FALSE(p.errors()[0].has_offsets());
  EXPECT_EQ(p.diagnostics.unlocated_spans, 1u);
  EXPECT_DOUBLE_EQ(score_annotations(p.errors()), 5.0);
}

TEST(AutoMqmCompletion, OmissionsMayPointIntoTheSource) {
  const auto seg = make_segment("s", "1", "The very old house.", "Das Haus.");
  auto p = parse_automqm_completion("very old - major/accuracy/omission", seg);
  ASSERT_EQ(p.errors().size(), 1u);
  EXPECT_EQ(p.errors()[0].side, TextSide::kSource);
  EXPECT_EQ(p.errors()[0].char_start, 4u);

  p = parse_automqm_completion("very old - major/accuracy/mistranslation", seg);
  EXPECT_FALSE(p.errors()[0].has_offsets());
}

TEST(AutoMqmCompletion, GrammarVariants) {
  const auto seg = make_segment("s", "1", "src", "ein well-known Wort");
  auto p = parse_automqm_completion(
      "Errors: \"well-known\" - Major/Terminology-Inappropriate for context\nWort - minor", seg);
  ASSERT_EQ(p.errors().size(), 2u);
  EXPECT_EQ(p.errors()[0].span_text, "well-known");
  EXPECT_EQ(p.errors()[0].char_start, 4u);
  EXPECT_EQ(p.errors()[0].category,
            ErrorCategory::make("Terminology", "Inappropriate for context"));
  EXPECT_EQ(p.errors()[1].severity, Severity::kMinor);
  EXPECT_FALSE(p.errors()[1].category);
}

TEST(AutoMqmCompletion, UnrecognizedCategoryIsKept) {
  const auto seg = make_segment("s", "1", "src", "abc");
  auto p = parse_automqm_completion("abc - major/accuracy/other", seg);
  ASSERT_EQ(p.errors().size(), 1u);
  EXPECT_FALSE(p.errors()[0].category->recognized);
  EXPECT_EQ(p.errors()[0].category->raw, "accuracy/other");
  EXPECT_EQ(score_annotations(p.errors()), 5.0);
}

TEST(AutoMqmCompletion, NonTranslationViolationIsAWarning) {
  const auto seg = make_segment("s", "1", "src", "abc def");
  auto p = parse_automqm_completion("abc def - major/non-translation; def - minor/style", seg);
  EXPECT_EQ(p.kind, CompletionKind::kErrorList);
  EXPECT_EQ(p.errors().size(), 2u);
  EXPECT_FALSE(p.diagnostics.warnings.empty());
}

TEST(AutoMqmCompletion, RoundTripsRenderedLists) {
  const auto seg = make_segment("s", "1", "A quick brown fox.",
                                "Ein schneller brauner Fuchs springt.");
  std::vector<ErrorAnnotation> gold{
      testing::span_at(seg.candidate, 4, 13, Severity::kMinor),
      testing::span_at(seg.candidate, 22, 27, Severity::kMajor),
  };
  gold[0].category = ErrorCategory::make("Fluency", "Punctuation");
  gold[1].category = ErrorCategory::make("Locale convention", "Date format");
  const std::string rendered = render_error_list(gold);
  auto p = parse_automqm_completion(rendered, seg);
  ASSERT_EQ(p.errors().size(), gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    EXPECT_EQ(p.errors()[i].span_text, gold[i].span_text);
    EXPECT_EQ(p.errors()[i].char_start, gold[i].char_start);
    EXPECT_EQ(p.errors()[i].severity, gold[i].severity);
    EXPECT_EQ(p.errors()[i].category, gold[i].category);
  }
  EXPECT_EQ(render_error_list(p.errors()), rendered);
}

TEST(AutoMqmCompletion, TotalOnRandomInput) {
  const auto seg = make_segment("s", "1", "Quelle - major/minor", "Ziel; - major/ x");
  std::mt19937_64 rng(2024);
  const std::string alphabet = "ab -/;:\n\"'MmajorinErs\xC3\xBC\xFF\x80";
  std::uniform_int_distribution<std::size_t> len(0, 60);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  for (int i = 0; i < 2000; ++i) {
    std::string s(len(rng), ' ');
    for (auto& c : s) c = alphabet[pick(rng)];
    ParsedCompletion p;
    ASSERT_NO_THROW(p = parse_automqm_completion(s, seg)) << s;
    EXPECT_EQ(p.raw, s);
    if (p.kind == CompletionKind::kInvalid) {
      EXPECT_TRUE(std::holds_alternative<std::monostate>(p.payload));
    }
    ASSERT_NO_THROW(parse_score_completion(s));
    ASSERT_NO_THROW(parse_class_completion(s));
  }
}

}  // namespace
}  // namespace mqmkit
