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

// Conversion between error spans and word-level OK/BAD tags.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

enum class WordTag { kOk, kBad };

inline std::optional<WordTag> parse_word_tag(std::string_view s) {
  if (s == "OK") return WordTag::kOk;
  if (s == "BAD") return WordTag::kBad;
  return std::nullopt;
}

inline std::string_view to_string(WordTag t) { return t == WordTag::kBad ? "BAD" : "OK"; }

// Tags over the whitespace tokenization of `text`, one per token.
struct WordTagSequence {
  std::string text;
  std::vector<text::Token> tokens;
  std::vector<WordTag> tags;

  std::size_t size() const { return tokens.size(); }

  std::string_view word(std::size_t i) const {
    return std::string_view(text).substr(tokens[i].begin,
                                         tokens[i].end - tokens[i].begin);
  }
};

// Throws LengthMismatch unless `tags` has one entry per word of `text`.
inline WordTagSequence make_word_tags(std::string text, std::vector<WordTag> tags) {
  WordTagSequence seq;
  seq.tokens = text::tokenize(text);
  seq.text = std::move(text);
  if (seq.tokens.size() != tags.size()) {
    throw LengthMismatch(std::to_string(tags.size()) + " tags for " +
                         std::to_string(seq.tokens.size()) + " words");
  }
  seq.tags = std::move(tags);
  return seq;
}

inline bool overlaps(const text::Token& t, std::size_t start, std::size_t end) {
  return t.begin < end && start < t.end;
}

// A word is BAD iff it shares at least one byte with a non-neutral span.
// Annotations on the other side of the segment, or without offsets, are
// ignored. Throws OffsetError for offsets outside `text`.
inline WordTagSequence spans_to_word_tags(std::span<const ErrorAnnotation> annotations,
                                          std::string_view text,
                                          TextSide side = TextSide::kCandidate) {
  WordTagSequence seq;
  seq.text = std::string(text);
  seq.tokens = text::tokenize(text);
  seq.tags.assign(seq.tokens.size(), WordTag::kOk);
  for (const auto& a : annotations) {
    if (a.side != side || !a.has_offsets()) continue;
    const std::size_t start = *a.char_start;
    const std::size_t end = *a.char_end;
    if (start >= end || end > text.size()) {
      throw OffsetError("span [" + std::to_string(start) + ", " + std::to_string(end) +
                        ") out of range for text of length " +
                        std::to_string(text.size()));
    }
    if (a.severity == Severity::kNeutral) continue;
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
      if (overlaps(seq.tokens[i], start, end)) seq.tags[i] = WordTag::kBad;
    }
  }
  return seq;
}

// One Major annotation without category per maximal run of BAD words,
// spanning the first to the last word of the run.
inline std::vector<ErrorAnnotation> word_tags_to_spans(const WordTagSequence& seq) {
  if (seq.tags.size() != seq.tokens.size()) {
    throw LengthMismatch("word tag sequence has mismatched tokens and tags");
  }
  std::vector<ErrorAnnotation> spans;
  std::size_t i = 0;
  while (i < seq.tags.size()) {
    if (seq.tags[i] != WordTag::kBad) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < seq.tags.size() && seq.tags[j + 1] == WordTag::kBad) ++j;
    ErrorAnnotation a;
    a.severity = Severity::kMajor;
    a.char_start = seq.tokens[i].begin;
    a.char_end = seq.tokens[j].end;
    a.span_text = seq.text.substr(*a.char_start, *a.char_end - *a.char_start);
    spans.push_back(std::move(a));
    i = j + 1;
  }
  return spans;
}

}  // namespace mqmkit
