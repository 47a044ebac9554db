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

// Parsers for LLM completions: 0-100 scores, verbal class labels, and
// AutoMQM error lists. Every parser is total: malformed input yields an
// `invalid` result (plus diagnostics), never an exception.

#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

enum class CompletionKind { kNumericScore, kClassLabel, kErrorList, kNoErrors, kInvalid };

inline std::string_view to_string(CompletionKind k) {
  switch (k) {
    case CompletionKind::kNumericScore:
      return "numeric_score";
    case CompletionKind::kClassLabel:
      return "class_label";
    case CompletionKind::kErrorList:
      return "error_list";
    case CompletionKind::kNoErrors:
      return "no_errors";
    case CompletionKind::kInvalid:
      return "invalid";
  }
  return "invalid";
}

struct ParseDiagnostics {
  std::size_t items_total = 0;
  std::size_t items_dropped = 0;
  // Spans found nowhere in the segment; kept without offsets.
  std::size_t unlocated_spans = 0;
  // Spans occurring more than once; the first occurrence was used.
  std::size_t ambiguous_spans = 0;
  std::vector<std::string> dropped_items;
  std::vector<std::string> warnings;
};

struct ParsedCompletion {
  CompletionKind kind = CompletionKind::kInvalid;
  // double for numeric_score, int for class_label, annotations for
  // error_list; empty for no_errors and invalid.
  std::variant<std::monostate, double, int, std::vector<ErrorAnnotation>> payload;
  std::string raw;
  ParseDiagnostics diagnostics;

  bool valid() const { return kind != CompletionKind::kInvalid; }

  std::optional<double> numeric_score() const {
    if (auto* v = std::get_if<double>(&payload)) return *v;
    return std::nullopt;
  }

  // 1-5 for a recognized label; 0 for anything invalid.
  int class_label() const {
    if (auto* v = std::get_if<int>(&payload)) return *v;
    return 0;
  }

  // Annotations of an error list; empty for every other kind.
  std::span<const ErrorAnnotation> errors() const {
    if (auto* v = std::get_if<std::vector<ErrorAnnotation>>(&payload)) return *v;
    return {};
  }
};

// Extracts the first number in the completion. Numbers outside [0, 100]
// (including negative ones) make the completion invalid.
inline ParsedCompletion parse_score_completion(std::string_view completion) {
  ParsedCompletion out;
  out.raw = std::string(completion);
  std::size_t i = 0;
  while (i < completion.size() && !(completion[i] >= '0' && completion[i] <= '9')) ++i;
  if (i == completion.size()) return out;
  const bool negative = i > 0 && completion[i - 1] == '-';
  double value = 0.0;
  auto [end, ec] = std::from_chars(completion.data() + i,
                                   completion.data() + completion.size(), value,
                                   std::chars_format::fixed);
  (void)end;
  if (ec != std::errc{} || negative || value < 0.0 || value > 100.0) return out;
  out.kind = CompletionKind::kNumericScore;
  out.payload = value;
  return out;
}

// Verbal rating labels, in class order 1..5.
inline constexpr std::array<std::string_view, 5> kClassLabels{
    "very bad", "bad", "ok", "good", "very good"};

// Case-insensitive substring search for the class labels; the longest
// matching label wins. No match is invalid (class 0).
inline ParsedCompletion parse_class_completion(std::string_view completion) {
  ParsedCompletion out;
  out.raw = std::string(completion);
  const std::string lowered = text::to_lower(completion);
  int best = 0;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < kClassLabels.size(); ++i) {
    if (lowered.find(kClassLabels[i]) != std::string::npos &&
        kClassLabels[i].size() > best_len) {
      best = static_cast<int>(i) + 1;
      best_len = kClassLabels[i].size();
    }
  }
  if (best == 0) return out;
  out.kind = CompletionKind::kClassLabel;
  out.payload = best;
  return out;
}

// Completions meaning "no errors" (compared after trimming, lowercasing and
// dropping a trailing period).
inline bool is_no_error_marker(std::string_view s) {
  std::string t = text::to_lower(text::trim(s));
  while (!t.empty() && t.back() == '.') t.pop_back();
  return t.empty() || t == "no errors" || t == "no error" || t == "none";
}

namespace detail {

struct SpanLocation {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t occurrences = 0;
};

// First case-sensitive occurrence, else first case-insensitive one.
inline std::optional<SpanLocation> locate(std::string_view haystack,
                                          std::string_view span) {
  if (span.empty()) return std::nullopt;
  if (auto pos = haystack.find(span); pos != std::string_view::npos) {
    return SpanLocation{pos, pos + span.size(), text::count_occurrences(haystack, span)};
  }
  if (auto pos = text::find_icase(haystack, span)) {
    return SpanLocation{*pos, *pos + span.size(), 1};
  }
  return std::nullopt;
}

struct ItemParts {
  std::string_view span;
  Severity severity;
  std::optional<std::string_view> category;
};

// `<span> - <severity>[/<category>]`. The separator is the rightmost '-'
// whose remainder starts with a severity token, so spans and categories may
// themselves contain hyphens.
inline std::optional<ItemParts> split_item(std::string_view item) {
  for (std::size_t p = item.rfind('-'); p != std::string_view::npos;
       p = p == 0 ? std::string_view::npos : item.rfind('-', p - 1)) {
    std::string_view tail = text::trim(item.substr(p + 1));
    std::optional<Severity> sev;
    for (Severity s : {Severity::kMajor, Severity::kMinor}) {
      if (text::starts_with_icase(tail, to_string(s))) sev = s;
    }
    if (!sev) continue;
    std::string_view rest = text::trim(tail.substr(5));
    std::optional<std::string_view> category;
    if (!rest.empty()) {
      if (rest.front() != '/') continue;
      category = text::trim(rest.substr(1));
      if (category->empty()) return std::nullopt;
    }
    std::string_view span = text::trim(item.substr(0, p));
    if (span.empty()) return std::nullopt;
    return ItemParts{span, *sev, category};
  }
  return std::nullopt;
}

}  // namespace detail

// Parses an AutoMQM error list: items separated by ';' (or newlines), each
// `<span> - <severity>/<category>`. Spans are located in the candidate, and
// in the source for omissions and source errors. Items that do not fit the
// grammar are dropped and counted.
inline ParsedCompletion parse_automqm_completion(std::string_view completion,
                                                 const Segment& segment) {
  ParsedCompletion out;
  out.raw = std::string(completion);
  std::string_view body = text::trim(completion);
  if (text::starts_with_icase(body, "errors:")) body = text::trim(body.substr(7));
  if (is_no_error_marker(body)) {
    out.kind = CompletionKind::kNoErrors;
    return out;
  }

  auto& diag = out.diagnostics;
  std::vector<ErrorAnnotation> annotations;
  for (std::string_view line : text::split(body, '\n')) {
    for (std::string_view raw_item : text::split(line, ';')) {
      std::string_view item = text::trim(raw_item);
      if (item.empty()) continue;
      ++diag.items_total;
      auto parts = detail::split_item(item);
      if (!parts) {
        ++diag.items_dropped;
        diag.dropped_items.emplace_back(item);
        continue;
      }
      ErrorAnnotation ann;
      ann.severity = parts->severity;
      if (parts->category) ann.category = ErrorCategory::parse(*parts->category);

      std::string_view span = parts->span;
      std::vector<std::string_view> variants{span};
      if (span.size() >= 2 && span.front() == '"' && span.back() == '"') {
        variants.push_back(span.substr(1, span.size() - 2));
      }
      const bool may_be_source =
          ann.category && (ann.category->is_omission() || ann.category->is_source_error());

      std::optional<detail::SpanLocation> where;
      for (TextSide side : {TextSide::kCandidate, TextSide::kSource}) {
        if (side == TextSide::kSource && !may_be_source) break;
        for (std::string_view v : variants) {
          where = detail::locate(segment.text(side), v);
          if (where) {
            ann.side = side;
            break;
          }
        }
        if (where) break;
      }
      if (where) {
        const std::string& located_in = segment.text(ann.side);
        ann.char_start = where->start;
        ann.char_end = where->end;
        ann.span_text = located_in.substr(where->start, where->end - where->start);
        if (where->occurrences > 1) {
          ++diag.ambiguous_spans;
          diag.warnings.push_back("span \"" + ann.span_text + "\" occurs " +
                                  std::to_string(where->occurrences) +
                                  " times; using the first");
        }
      } else {
        ann.span_text = std::string(variants.back());
        ++diag.unlocated_spans;
      }
      annotations.push_back(std::move(ann));
    }
  }

  if (annotations.empty()) return out;

  SegmentAssessment probe;
  probe.annotations = annotations;
  for (auto& v : guideline_violations(probe)) {
    if (v.involves_non_translation()) diag.warnings.push_back(std::move(v.message));
  }
  out.kind = CompletionKind::kErrorList;
  out.payload = std::move(annotations);
  return out;
}

}  // namespace mqmkit
