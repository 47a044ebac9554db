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

// Prompt rendering for the two evaluation modes:
//
//   score_sqm  the GEMBA-SQM prompt; the model answers with a 0-100 score.
//   automqm    the model lists MQM errors as `span - severity/category`.
//
// Both have reference-based and reference-less variants. A prompt is the
// instruction once, then each in-context example with its answer filled in,
// then the target with the answer slot left open.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

// Template text, versioned. Placeholders are `{name}`.
namespace templates {

inline constexpr std::string_view kScoreSqmVersion = "gemba-sqm/v1";
inline constexpr std::string_view kAutoMqmVersion = "automqm/v1";

inline constexpr std::string_view kScoreSqmInstructionRef =
    "Score the following translation from {src_lang} to {tgt_lang} with respect "
    "to the human reference on a continuous scale from 0 to 100 that starts with "
    "\"No meaning preserved\", goes through \"Some meaning preserved\", then "
    "\"Most meaning preserved and few grammar mistakes\", up to \"Perfect meaning "
    "and grammar\".";

inline constexpr std::string_view kScoreSqmInstructionNoRef =
    "Score the following translation from {src_lang} to {tgt_lang} on a "
    "continuous scale from 0 to 100 that starts with \"No meaning preserved\", "
    "goes through \"Some meaning preserved\", then \"Most meaning preserved and "
    "few grammar mistakes\", up to \"Perfect meaning and grammar\".";

inline constexpr std::string_view kAutoMqmInstruction =
    "Based on the given source and reference, identify the major and minor "
    "errors in this translation. Note that Major errors refer to actual "
    "translation or grammatical errors, and Minor errors refer to smaller "
    "imperfections, and purely subjective opinions about the translation.";

inline constexpr std::string_view kSourceLine = "{src_lang} source: \"{source}\"";
inline constexpr std::string_view kReferenceLine =
    "{tgt_lang} human reference: \"{reference}\"";
inline constexpr std::string_view kCandidateLine = "{tgt_lang} translation: \"{candidate}\"";

inline constexpr std::string_view kScoreLabel = "Score (0-100):";
inline constexpr std::string_view kErrorsLabel = "Errors:";

}  // namespace templates

// Replaces `{name}` placeholders in one pass; substituted values are never
// rescanned. Unknown placeholders throw ConfigError.
inline std::string fill_placeholders(std::string_view tmpl,
                                     const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        std::string name(tmpl.substr(i + 1, close - i - 1));
        auto it = values.find(name);
        if (it == values.end()) throw ConfigError("unknown placeholder {" + name + "}");
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

// English name for a language code of the supported pairs; unknown codes
// are returned unchanged.
inline std::string language_name(std::string_view code) {
  static const std::map<std::string, std::string, std::less<>> kNames{
      {"en", "English"}, {"de", "German"},  {"zh", "Chinese"},
      {"ru", "Russian"}, {"kk", "Kazakh"}, {"gu", "Gujarati"},
  };
  auto it = kNames.find(code);
  return it == kNames.end() ? std::string(code) : it->second;
}

// ("en-de") -> ("English", "German").
inline std::pair<std::string, std::string> language_names(std::string_view lp) {
  auto dash = lp.find('-');
  if (dash == std::string_view::npos) return {std::string(lp), std::string(lp)};
  return {language_name(lp.substr(0, dash)), language_name(lp.substr(dash + 1))};
}

enum class PromptMode { kScoreSqm, kAutoMqm };

inline std::string_view to_string(PromptMode m) {
  return m == PromptMode::kScoreSqm ? "score" : "automqm";
}

struct PromptTemplate {
  PromptMode mode = PromptMode::kScoreSqm;
  bool with_reference = true;
  std::string version;
  std::string instruction;
  std::string source_line;
  std::string reference_line;
  std::string candidate_line;
  std::string output_label;

  static PromptTemplate make(PromptMode mode, bool with_reference) {
    PromptTemplate t;
    t.mode = mode;
    t.with_reference = with_reference;
    t.source_line = std::string(templates::kSourceLine);
    t.reference_line = std::string(templates::kReferenceLine);
    t.candidate_line = std::string(templates::kCandidateLine);
    if (mode == PromptMode::kScoreSqm) {
      t.version = std::string(templates::kScoreSqmVersion);
      t.instruction = std::string(with_reference ? templates::kScoreSqmInstructionRef
                                                 : templates::kScoreSqmInstructionNoRef);
      t.output_label = std::string(templates::kScoreLabel);
    } else {
      t.version = std::string(templates::kAutoMqmVersion);
      t.instruction = std::string(templates::kAutoMqmInstruction);
      t.output_label = std::string(templates::kErrorsLabel);
    }
    return t;
  }
};

// A labeled example for the prompt. AutoMQM examples carry the gold errors
// as parallel span / severity / category lists (the pool's storage form);
// score examples carry a gold score.
struct ICLExample {
  Segment segment;
  std::vector<std::string> spans;
  std::vector<std::string> severities;
  std::vector<std::string> categories;
  std::optional<double> score;

  bool lists_aligned() const {
    return spans.size() == severities.size() && spans.size() == categories.size();
  }

  std::size_t error_count() const { return severities.size(); }

  // Zips the gold lists. Throws DataError if they are misaligned or a
  // severity is not major/minor/neutral.
  std::vector<ErrorAnnotation> annotations() const {
    if (!lists_aligned()) {
      throw DataError("example " + segment.key().to_string() +
                      " has misaligned span/severity/category lists");
    }
    std::vector<ErrorAnnotation> out;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      auto sev = parse_severity(severities[i]);
      if (!sev) throw DataError("example has unknown severity '" + severities[i] + "'");
      ErrorAnnotation a;
      a.span_text = spans[i];
      a.severity = *sev;
      if (*sev != Severity::kNeutral && !categories[i].empty()) {
        a.category = ErrorCategory::parse(categories[i]);
      }
      out.push_back(std::move(a));
    }
    return out;
  }
};

inline constexpr std::string_view kNoErrorsMarker = "No errors";

// `span - severity/category` items joined by "; " in the given order.
// Neutral annotations are skipped, an empty span renders as "" and an empty
// list renders "No errors".
inline std::string render_error_list(std::span<const ErrorAnnotation> annotations) {
  std::string out;
  for (const auto& a : annotations) {
    if (a.severity == Severity::kNeutral) continue;
    if (!out.empty()) out += "; ";
    out += a.span_text.empty() ? "\"\"" : a.span_text;
    out += " - ";
    out += to_string(a.severity);
    if (a.category) {
      out += "/";
      out += a.category->canonical();
    }
  }
  return out.empty() ? std::string(kNoErrorsMarker) : out;
}

namespace detail {

inline std::string render_block(const PromptTemplate& t, const Segment& seg,
                                const std::optional<std::string>& output) {
  const auto [src_lang, tgt_lang] = language_names(seg.lp);
  std::map<std::string, std::string> values{
      {"src_lang", src_lang},
      {"tgt_lang", tgt_lang},
      {"source", seg.source},
      {"candidate", seg.candidate},
      {"reference", seg.reference.value_or("")},
  };
  std::string out = fill_placeholders(t.source_line, values) + "\n";
  if (t.with_reference) out += fill_placeholders(t.reference_line, values) + "\n";
  out += fill_placeholders(t.candidate_line, values) + "\n";
  out += t.output_label;
  if (output) out += " " + *output;
  return out;
}

}  // namespace detail

// Throws LanguageMismatch if an example's language pair differs from the
// target's, and MissingReference if the template needs a reference that a
// segment lacks.
inline std::string render_prompt(const PromptTemplate& t,
                                 std::span<const ICLExample> examples,
                                 const Segment& target) {
  auto check_reference = [&](const Segment& s) {
    if (t.with_reference && !s.reference) {
      throw MissingReference("segment " + s.key().to_string() + " has no reference");
    }
  };
  check_reference(target);
  for (const auto& ex : examples) {
    if (ex.segment.lp != target.lp) {
      throw LanguageMismatch("example " + ex.segment.key().to_string() +
                             " does not match target language pair " + target.lp);
    }
    check_reference(ex.segment);
  }

  const auto [src_lang, tgt_lang] = language_names(target.lp);
  std::string prompt =
      fill_placeholders(t.instruction, {{"src_lang", src_lang}, {"tgt_lang", tgt_lang}});
  prompt += "\n\n";
  for (const auto& ex : examples) {
    std::string answer;
    if (t.mode == PromptMode::kScoreSqm) {
      if (!ex.score) {
        throw DataError("score example " + ex.segment.key().to_string() + " has no score");
      }
      answer = text::format_number(*ex.score);
    } else {
      answer = render_error_list(ex.annotations());
    }
    prompt += detail::render_block(t, ex.segment, answer) + "\n\n";
  }
  prompt += detail::render_block(t, target, std::nullopt);
  return prompt;
}

}  // namespace mqmkit
