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

// Readers for the gold-data formats:
//
//   segments   JSONL  {lp, system_id, doc_id, seg_id, source, candidate, reference?}
//   MQM        TSV    system doc seg_id rater source target category severity
//                     (error span between <v> and </v>; one row per error)
//   DA         TSV    lp system seg_id rater score
//   word tags  TSV    system seg_id tags   (space-separated OK/BAD)
//   assessments JSONL as written by `to_json(SegmentAssessment)`
//
// All readers throw SchemaError (with a 1-based line number) on malformed
// input and DuplicateRecord on repeated keys. Empty files are malformed.

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"
#include "mqmkit/word_tags.hpp"

namespace mqmkit {

namespace detail {

struct NumberedLine {
  std::size_t number;
  std::string text;
};

// Non-blank lines of a file with trailing CR removed.
inline std::vector<NumberedLine> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, 0, "cannot open file");
  std::vector<NumberedLine> lines;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    lines.push_back({n, std::move(line)});
  }
  if (lines.empty()) throw SchemaError(path, 0, "file is empty");
  return lines;
}

inline std::vector<std::string> split_tsv(const std::string& line) {
  std::vector<std::string> out;
  for (auto f : text::split(line, '\t')) out.emplace_back(f);
  return out;
}

inline double parse_double(const std::string& path, std::size_t line,
                           std::string_view field) {
  field = text::trim(field);
  double v = 0.0;
  auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || end != field.data() + field.size() || !std::isfinite(v)) {
    throw SchemaError(path, line, "not a finite number: '" + std::string(field) + "'");
  }
  return v;
}

// Removes one <v>...</v> pair. Returns the stripped text and the marked
// byte range, if any.
struct MarkedText {
  std::string text;
  std::optional<std::pair<std::size_t, std::size_t>> span;
};

inline MarkedText strip_span_markers(const std::string& path, std::size_t line,
                                     std::string_view s) {
  constexpr std::string_view kOpen = "<v>";
  constexpr std::string_view kClose = "</v>";
  const auto open = s.find(kOpen);
  const auto close = s.find(kClose);
  if (open == std::string_view::npos && close == std::string_view::npos) {
    return {std::string(s), std::nullopt};
  }
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw SchemaError(path, line, "unbalanced <v> span markers");
  }
  if (s.find(kOpen, open + 1) != std::string_view::npos ||
      s.find(kClose, close + 1) != std::string_view::npos) {
    throw SchemaError(path, line, "more than one marked span in a field");
  }
  MarkedText out;
  out.text = std::string(s.substr(0, open));
  const std::size_t start = out.text.size();
  out.text += s.substr(open + kOpen.size(), close - open - kOpen.size());
  const std::size_t end = out.text.size();
  out.text += s.substr(close + kClose.size());
  if (end > start) out.span = std::make_pair(start, end);
  return out;
}

}  // namespace detail

inline std::vector<Segment> load_segments_jsonl(const std::string& path) {
  std::vector<Segment> segments;
  std::set<SegmentKey> seen;
  for (const auto& line : detail::read_lines(path)) {
    Segment s;
    try {
      s = segment_from_json(Json::parse(line.text));
    } catch (const Json::exception& e) {
      throw SchemaError(path, line.number, e.what());
    } catch (const DataError& e) {
      throw SchemaError(path, line.number, e.what());
    }
    if (!seen.insert(s.key()).second) {
      throw DuplicateRecord(path, line.number, "duplicate segment " + s.key().to_string());
    }
    segments.push_back(std::move(s));
  }
  return segments;
}

struct MqmLoadOptions {
  // Guideline violations involving Non-translation are errors when strict,
  // warnings otherwise. The five-error cap is always a warning.
  bool strict = true;
  WeightScheme scheme = WeightScheme::defaults();
};

struct MqmCorpus {
  std::vector<SegmentAssessment> assessments;
  // One segment per (system, seg_id), with span markers removed.
  std::vector<Segment> segments;
};

inline constexpr std::string_view kMqmHeader =
    "system\tdoc\tseg_id\trater\tsource\ttarget\tcategory\tseverity";

// Reads an MQM TSV for language pair `lp`. Rows of one (system, seg_id,
// rater) must be contiguous; a group reappearing later is a duplicate.
inline MqmCorpus load_mqm_corpus(const std::string& path, const std::string& lp,
                                 const MqmLoadOptions& options = {}) {
  const auto lines = detail::read_lines(path);
  if (lines.front().text != kMqmHeader) {
    throw SchemaError(path, lines.front().number, "expected MQM header");
  }
  if (lines.size() < 2) throw SchemaError(path, lines.front().number, "no MQM rows");

  MqmCorpus corpus;
  std::map<SegmentKey, std::size_t> segment_index;
  std::set<std::pair<SegmentKey, std::string>> closed_groups;
  std::vector<std::size_t> first_line;
  std::optional<std::pair<SegmentKey, std::string>> current;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [number, row] = lines[i];
    auto f = detail::split_tsv(row);
    if (f.size() != 8) {
      throw SchemaError(path, number, "expected 8 fields, got " + std::to_string(f.size()));
    }
    const SegmentKey key{lp, f[0], f[2]};
    const std::string& rater = f[3];
    auto severity = parse_severity(f[7]);
    if (!severity) throw SchemaError(path, number, "unknown severity '" + f[7] + "'");
    auto source = detail::strip_span_markers(path, number, f[4]);
    auto target = detail::strip_span_markers(path, number, f[5]);
    if (source.text.empty() || target.text.empty()) {
      throw SchemaError(path, number, "empty source or target");
    }

    auto [it, inserted] = segment_index.try_emplace(key, corpus.segments.size());
    if (inserted) {
      corpus.segments.push_back(
          Segment{source.text, target.text, std::nullopt, lp, f[0], f[1], f[2]});
    } else {
      const auto& seg = corpus.segments[it->second];
      if (seg.candidate != target.text || seg.source != source.text) {
        throw SchemaError(path, number,
                          "segment text differs between rows of " + key.to_string());
      }
    }

    auto group = std::make_pair(key, rater);
    if (!current || *current != group) {
      if (current) closed_groups.insert(*current);
      if (closed_groups.count(group)) {
        throw DuplicateRecord(path, number,
                              "rows for " + key.to_string() + " rater " + rater +
                                  " are not contiguous");
      }
      current = group;
      SegmentAssessment a;
      a.key = key;
      a.rater_id = rater;
      corpus.assessments.push_back(std::move(a));
      first_line.push_back(number);
    }

    if (*severity == Severity::kNeutral) continue;
    ErrorAnnotation ann;
    ann.severity = *severity;
    ann.category = ErrorCategory::parse(f[6]);
    const auto& marked = target.span ? target : source;
    if (marked.span) {
      ann.side = target.span ? TextSide::kCandidate : TextSide::kSource;
      ann.char_start = marked.span->first;
      ann.char_end = marked.span->second;
      ann.span_text = marked.text.substr(marked.span->first,
                                         marked.span->second - marked.span->first);
    }
    corpus.assessments.back().annotations.push_back(std::move(ann));
  }

  for (std::size_t i = 0; i < corpus.assessments.size(); ++i) {
    auto& a = corpus.assessments[i];
    a.derived_score = score_annotations(a.annotations, options.scheme);
    for (auto& v : guideline_violations(a)) {
      if (options.strict && v.involves_non_translation()) {
        throw SchemaError(path, first_line[i], a.key.to_string() + ": " + v.message);
      }
      a.warnings.push_back(std::move(v.message));
    }
  }
  return corpus;
}

inline std::vector<SegmentAssessment> load_mqm_tsv(const std::string& path,
                                                   const std::string& lp,
                                                   const MqmLoadOptions& options = {}) {
  return load_mqm_corpus(path, lp, options).assessments;
}

// Population z-score per rater; a rater whose scores are all equal maps
// to 0.
inline void z_normalize_per_rater(std::vector<SegmentAssessment>& assessments) {
  std::map<std::string, std::vector<std::size_t>> by_rater;
  for (std::size_t i = 0; i < assessments.size(); ++i) {
    by_rater[assessments[i].rater_id].push_back(i);
  }
  for (const auto& [rater, idx] : by_rater) {
    double sum = 0.0;
    for (auto i : idx) sum += *assessments[i].raw_score;
    const double mean = sum / static_cast<double>(idx.size());
    double ss = 0.0;
    for (auto i : idx) {
      const double d = *assessments[i].raw_score - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(idx.size()));
    for (auto i : idx) {
      auto& s = assessments[i].raw_score;
      s = sd > 0.0 ? (*s - mean) / sd : 0.0;
    }
  }
}

inline std::vector<SegmentAssessment> load_da_scores(const std::string& path,
                                                     bool normalize_per_rater = false) {
  const auto lines = detail::read_lines(path);
  std::vector<SegmentAssessment> out;
  std::set<std::pair<SegmentKey, std::string>> seen;
  for (const auto& [number, row] : lines) {
    auto f = detail::split_tsv(row);
    if (number == lines.front().number && !f.empty() && f[0] == "lp") continue;
    if (f.size() != 5) {
      throw SchemaError(path, number, "expected 5 fields, got " + std::to_string(f.size()));
    }
    SegmentAssessment a;
    a.key = {f[0], f[1], f[2]};
    a.rater_id = f[3];
    a.raw_score = detail::parse_double(path, number, f[4]);
    if (!seen.insert({a.key, a.rater_id}).second) {
      throw DuplicateRecord(path, number,
                            "duplicate score for " + a.key.to_string() + " rater " + a.rater_id);
    }
    out.push_back(std::move(a));
  }
  if (out.empty()) throw SchemaError(path, lines.front().number, "no DA rows");
  if (normalize_per_rater) z_normalize_per_rater(out);
  return out;
}

// Word-level tags for language pair `lp`. Each row's tags are aligned to the
// whitespace tokens of the matching segment's candidate.
inline std::vector<std::pair<SegmentKey, WordTagSequence>> load_word_tags(
    const std::string& path, const std::string& lp, const std::vector<Segment>& segments) {
  std::map<SegmentKey, const Segment*> by_key;
  for (const auto& s : segments) by_key[s.key()] = &s;
  const auto lines = detail::read_lines(path);
  std::vector<std::pair<SegmentKey, WordTagSequence>> out;
  std::set<SegmentKey> seen;
  for (const auto& [number, row] : lines) {
    auto f = detail::split_tsv(row);
    if (number == lines.front().number && f.size() == 3 && f[0] == "system") continue;
    if (f.size() != 3) {
      throw SchemaError(path, number, "expected 3 fields, got " + std::to_string(f.size()));
    }
    SegmentKey key{lp, f[0], f[1]};
    auto it = by_key.find(key);
    if (it == by_key.end()) throw SchemaError(path, number, "unknown segment " + key.to_string());
    std::vector<WordTag> tags;
    for (const auto& tok : text::tokenize(f[2])) {
      auto t = parse_word_tag(std::string_view(f[2]).substr(tok.begin, tok.end - tok.begin));
      if (!t) throw SchemaError(path, number, "tags must be OK or BAD");
      tags.push_back(*t);
    }
    if (!seen.insert(key).second) {
      throw DuplicateRecord(path, number, "duplicate tags for " + key.to_string());
    }
    try {
      out.emplace_back(key, make_word_tags(it->second->candidate, std::move(tags)));
    } catch (const LengthMismatch& e) {
      throw SchemaError(path, number, e.what());
    }
  }
  if (out.empty()) throw SchemaError(path, lines.front().number, "no word-tag rows");
  return out;
}

inline std::vector<SegmentAssessment> load_assessments_jsonl(const std::string& path) {
  std::vector<SegmentAssessment> out;
  std::set<std::pair<SegmentKey, std::string>> seen;
  for (const auto& line : detail::read_lines(path)) {
    SegmentAssessment a;
    try {
      a = assessment_from_json(Json::parse(line.text));
    } catch (const Json::exception& e) {
      throw SchemaError(path, line.number, e.what());
    } catch (const DataError& e) {
      throw SchemaError(path, line.number, e.what());
    }
    if (!seen.insert({a.key, a.rater_id}).second) {
      throw DuplicateRecord(path, line.number,
                            "duplicate assessment for " + a.key.to_string());
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace mqmkit
