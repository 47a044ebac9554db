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

// MQM domain model: severities, the error-category hierarchy, annotations,
// segments, and the weighting scheme that turns annotations into scores.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

enum class Severity { kMajor, kMinor, kNeutral };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kMajor:
      return "major";
    case Severity::kMinor:
      return "minor";
    case Severity::kNeutral:
      return "neutral";
  }
  return "neutral";
}

// Case-insensitive. Only "major", "minor" and "neutral" are accepted; the
// WMT spelling "no-error" is an alias of neutral.
inline std::optional<Severity> parse_severity(std::string_view s) {
  s = text::trim(s);
  if (text::iequals(s, "major")) return Severity::kMajor;
  if (text::iequals(s, "minor")) return Severity::kMinor;
  if (text::iequals(s, "neutral") || text::iequals(s, "no-error")) {
    return Severity::kNeutral;
  }
  return std::nullopt;
}

namespace detail {

struct HierarchyEntry {
  std::string_view top;
  std::array<std::string_view, 6> subs;
};

// The MQM error typology, in typology order.
inline constexpr std::array<HierarchyEntry, 8> kHierarchy{{
    {"Accuracy", {"Addition", "Omission", "Mistranslation", "Untranslated text"}},
    {"Fluency",
     {"Punctuation", "Spelling", "Grammar", "Register", "Inconsistency",
      "Character encoding"}},
    {"Terminology", {"Inappropriate for context", "Inconsistent use"}},
    {"Style", {"Awkward"}},
    {"Locale convention",
     {"Address format", "Currency format", "Date format", "Name format",
      "Telephone format", "Time format"}},
    {"Other", {}},
    {"Source error", {}},
    {"Non-translation", {}},
}};

// Lowercase, drop trailing '!' / '.', and collapse runs of separators
// (space, '-', '_', '/') to one space.
inline std::string normalize_category_key(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == '!' || s.back() == '.')) s.remove_suffix(1);
  std::string out;
  bool pending_sep = false;
  for (char c : s) {
    if (text::is_space(c) || c == '-' || c == '_' || c == '/') {
      pending_sep = !out.empty();
      continue;
    }
    if (pending_sep) out.push_back(' ');
    pending_sep = false;
    out.push_back(text::to_lower(c));
  }
  return out;
}

}  // namespace detail

// An MQM category. Recognized categories hold the canonical (top, sub)
// names from the hierarchy; anything else is kept with `recognized == false`
// and its raw text in `raw`.
struct ErrorCategory {
  std::string top;
  std::string sub;
  bool recognized = true;
  std::string raw;

  static ErrorCategory make(std::string_view top, std::string_view sub = {}) {
    ErrorCategory c;
    c.top = std::string(top);
    c.sub = std::string(sub);
    c.raw = c.sub.empty() ? c.top : c.top + "/" + c.sub;
    return c;
  }

  // Looks `raw` up in the hierarchy after normalization. Accepts "top",
  // "top/sub", "top-sub", any case, and locale subcategories with or
  // without the trailing "format".
  static ErrorCategory parse(std::string_view raw) {
    const std::string key = detail::normalize_category_key(raw);
    for (const auto& entry : detail::kHierarchy) {
      const std::string top_key = detail::normalize_category_key(entry.top);
      if (key == top_key) return from_lookup(entry.top, {}, raw);
      if (key.size() <= top_key.size() + 1 ||
          key.compare(0, top_key.size() + 1, top_key + " ") != 0) {
        continue;
      }
      const std::string sub_key = key.substr(top_key.size() + 1);
      for (std::string_view sub : entry.subs) {
        if (sub.empty()) continue;
        std::string candidate = detail::normalize_category_key(sub);
        if (sub_key == candidate) return from_lookup(entry.top, sub, raw);
        constexpr std::string_view kFormat = " format";
        if (candidate.size() > kFormat.size() &&
            candidate.compare(candidate.size() - kFormat.size(), kFormat.size(),
                              kFormat) == 0 &&
            sub_key == candidate.substr(0, candidate.size() - kFormat.size())) {
          return from_lookup(entry.top, sub, raw);
        }
      }
    }
    ErrorCategory c;
    c.top = std::string(text::trim(raw));
    c.recognized = false;
    c.raw = std::string(raw);
    return c;
  }

  bool is_non_translation() const {
    return recognized && top == "Non-translation";
  }
  bool is_fluency_punctuation() const {
    return recognized && top == "Fluency" && sub == "Punctuation";
  }
  bool is_source_error() const { return recognized && top == "Source error"; }
  bool is_omission() const {
    return recognized && top == "Accuracy" && sub == "Omission";
  }

  // Lowercase, with "-" joining category and subcategory
  // ("accuracy-mistranslation"). Unrecognized categories render as their
  // trimmed raw text.
  std::string canonical() const {
    if (!recognized) return std::string(text::trim(raw));
    std::string out = text::to_lower(top);
    if (!sub.empty()) out += "-" + text::to_lower(sub);
    return out;
  }

  // Equality up to normalization: ignores `raw` for recognized categories.
  friend bool operator==(const ErrorCategory& a, const ErrorCategory& b) {
    if (a.recognized != b.recognized) return false;
    if (!a.recognized) {
      return detail::normalize_category_key(a.raw) ==
             detail::normalize_category_key(b.raw);
    }
    return a.top == b.top && a.sub == b.sub;
  }

 private:
  static ErrorCategory from_lookup(std::string_view top, std::string_view sub,
                                   std::string_view raw) {
    ErrorCategory c = make(top, sub);
    c.raw = std::string(raw);
    return c;
  }
};

// Which text an annotation's offsets index into.
enum class TextSide { kCandidate, kSource };

// One error span. Offsets are byte offsets into the UTF-8 annotated text,
// end-exclusive, and absent when the span could not be located.
struct ErrorAnnotation {
  std::string span_text;
  std::optional<std::size_t> char_start;
  std::optional<std::size_t> char_end;
  TextSide side = TextSide::kCandidate;
  Severity severity = Severity::kMinor;
  std::optional<ErrorCategory> category;

  bool has_offsets() const { return char_start.has_value() && char_end.has_value(); }
};

// Throws OffsetError / DataError when `a` breaks the annotation invariants
// against the text its offsets point into.
inline void validate_annotation(const ErrorAnnotation& a,
                                std::string_view annotated_text) {
  if (a.severity == Severity::kNeutral && a.category.has_value()) {
    throw DataError("neutral annotation carries a category");
  }
  if (a.char_start.has_value() != a.char_end.has_value()) {
    throw OffsetError("annotation has only one of start/end offsets");
  }
  if (!a.has_offsets()) return;
  const std::size_t start = *a.char_start;
  const std::size_t end = *a.char_end;
  if (!(start < end && end <= annotated_text.size())) {
    throw OffsetError("annotation offsets [" + std::to_string(start) + ", " +
                      std::to_string(end) + ") out of range for text of length " +
                      std::to_string(annotated_text.size()));
  }
  if (annotated_text.substr(start, end - start) != a.span_text) {
    throw OffsetError("annotation span text does not match its offsets");
  }
}

struct SegmentKey {
  std::string lp;
  std::string system_id;
  std::string seg_id;

  friend auto operator<=>(const SegmentKey&, const SegmentKey&) = default;
  friend bool operator==(const SegmentKey&, const SegmentKey&) = default;

  std::string to_string() const { return lp + "/" + system_id + "/" + seg_id; }
};

struct Segment {
  std::string source;
  std::string candidate;
  std::optional<std::string> reference;
  std::string lp;
  std::string system_id;
  std::string doc_id;
  std::string seg_id;

  SegmentKey key() const { return {lp, system_id, seg_id}; }

  const std::string& text(TextSide side) const {
    return side == TextSide::kSource ? source : candidate;
  }
};

// Throws DataError unless source and candidate are non-empty.
inline void validate_segment(const Segment& s) {
  if (s.source.empty()) throw DataError("segment " + s.key().to_string() + ": empty source");
  if (s.candidate.empty()) {
    throw DataError("segment " + s.key().to_string() + ": empty candidate");
  }
}

// Everything one rater (human or model) said about one segment.
struct SegmentAssessment {
  SegmentKey key;
  std::string rater_id;
  std::vector<ErrorAnnotation> annotations;
  // Score given directly (DA, score prediction). Higher is better.
  std::optional<double> raw_score;
  // MQM score derived from `annotations`, stored penalty-positive.
  std::optional<double> derived_score;
  std::vector<std::string> warnings;

  std::optional<double> score() const {
    return derived_score.has_value() ? derived_score : raw_score;
  }
};

// Maximum number of target-side errors the annotation guidelines allow.
inline constexpr std::size_t kMaxGuidelineErrors = 5;

struct GuidelineViolation {
  enum class Kind {
    kMultipleNonTranslation,
    kNonTranslationNotAlone,
    kTooManyErrors,
    kUndefinedCombination,
  };
  Kind kind;
  std::string message;

  bool involves_non_translation() const {
    return kind == Kind::kMultipleNonTranslation || kind == Kind::kNonTranslationNotAlone;
  }
};

// Guideline checks for one assessment: at most one Non-translation and then
// nothing else, at most five target errors (source errors excluded), and
// no minor Non-translation / Source error.
inline std::vector<GuidelineViolation> guideline_violations(const SegmentAssessment& a) {
  using Kind = GuidelineViolation::Kind;
  std::vector<GuidelineViolation> out;
  std::size_t non_translation = 0;
  std::size_t target_errors = 0;
  std::size_t errors = 0;
  for (const auto& ann : a.annotations) {
    if (ann.severity == Severity::kNeutral) continue;
    ++errors;
    const bool nt = ann.category && ann.category->is_non_translation();
    const bool src = ann.category && ann.category->is_source_error();
    if (nt) ++non_translation;
    if (!src) ++target_errors;
    if (ann.severity == Severity::kMinor && (nt || src)) {
      out.push_back({Kind::kUndefinedCombination,
                     "minor severity with category " + ann.category->canonical()});
    }
  }
  if (non_translation > 1) {
    out.push_back({Kind::kMultipleNonTranslation, "more than one non-translation error"});
  }
  if (non_translation >= 1 && errors > non_translation) {
    out.push_back({Kind::kNonTranslationNotAlone,
                   "non-translation error is not the only annotation"});
  }
  if (target_errors > kMaxGuidelineErrors) {
    out.push_back({Kind::kTooManyErrors,
                   std::to_string(target_errors) + " errors exceed the cap of " +
                       std::to_string(kMaxGuidelineErrors)});
  }
  return out;
}

enum class SignConvention { kPenaltyPositive, kPenaltyNegative };

// Weight classes of the MQM scoring table.
enum class CategoryClass { kNonTranslation, kFluencyPunctuation, kOther };

inline CategoryClass category_class(const std::optional<ErrorCategory>& c) {
  if (!c) return CategoryClass::kOther;
  if (c->is_non_translation()) return CategoryClass::kNonTranslation;
  if (c->is_fluency_punctuation()) return CategoryClass::kFluencyPunctuation;
  return CategoryClass::kOther;
}

// Penalty weight per (severity, category class). Weights are non-negative;
// the sign convention is applied to the final sum.
class WeightScheme {
 public:
  using Table = std::array<std::array<double, 3>, 3>;

  // Major: Non-translation 25, others 5. Minor: Fluency/Punctuation 0.1,
  // others 1. Neutral: 0.
  WeightScheme() = default;

  explicit WeightScheme(Table table,
                        SignConvention sign = SignConvention::kPenaltyPositive)
      : table_(table), sign_(sign) {
    for (const auto& row : table_) {
      for (double w : row) {
        if (!(w >= 0.0)) throw ConfigError("MQM weights must be non-negative");
      }
    }
  }

  static WeightScheme defaults(SignConvention sign = SignConvention::kPenaltyPositive) {
    WeightScheme s;
    s.sign_ = sign;
    return s;
  }

  SignConvention sign() const { return sign_; }
  const Table& table() const { return table_; }

  double weight(Severity sev, CategoryClass cls) const {
    // Minor Non-translation is not a combination the guidelines define; it
    // scores like any other minor error.
    if (sev == Severity::kMinor && cls == CategoryClass::kNonTranslation) {
      cls = CategoryClass::kOther;
    }
    return table_[static_cast<std::size_t>(sev)][static_cast<std::size_t>(cls)];
  }

  double weight(const ErrorAnnotation& a) const {
    return weight(a.severity, category_class(a.category));
  }

 private:
  // Rows: Severity. Columns: CategoryClass.
  Table table_{{
      {25.0, 5.0, 5.0},
      {1.0, 0.1, 1.0},
      {0.0, 0.0, 0.0},
  }};
  SignConvention sign_ = SignConvention::kPenaltyPositive;
};

// Sum of annotation weights under `scheme`. Weights are summed in ascending
// order so the result is independent of annotation order.
inline double score_annotations(std::span<const ErrorAnnotation> annotations,
                                const WeightScheme& scheme = {}) {
  std::vector<double> weights;
  weights.reserve(annotations.size());
  for (const auto& a : annotations) weights.push_back(scheme.weight(a));
  std::sort(weights.begin(), weights.end());
  double total = 0.0;
  for (double w : weights) total += w;
  if (total == 0.0) return 0.0;
  return scheme.sign() == SignConvention::kPenaltyNegative ? -total : total;
}

namespace detail {

// Arithmetic mean clamped to [min, max] of the inputs so rounding never
// pushes it outside the input range.
inline double bounded_mean(std::span<const double> xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return std::clamp(mean, *lo, *hi);
}

}  // namespace detail

// Mean over raters of each assessment's derived (else raw) score.
inline double aggregate_raters(std::span<const SegmentAssessment> assessments) {
  if (assessments.empty()) throw MissingRatings("no ratings for segment");
  std::vector<double> scores;
  scores.reserve(assessments.size());
  for (const auto& a : assessments) {
    auto s = a.score();
    if (!s) {
      throw MissingRatings("rater " + a.rater_id + " has no score for " +
                           a.key.to_string());
    }
    scores.push_back(*s);
  }
  return detail::bounded_mean(scores);
}

inline double system_score(std::span<const double> segment_scores) {
  if (segment_scores.empty()) throw MissingSegments("system has no segment scores");
  return detail::bounded_mean(segment_scores);
}

}  // namespace mqmkit
