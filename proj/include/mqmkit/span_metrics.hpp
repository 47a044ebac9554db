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

// Span-level meta-evaluation over word positions.
//
// The positional set of a span list is the set of (0-based, whitespace
// tokenized) word indices the spans touch; a word is touched if it shares
// at least one byte with a span. On top of that:
//
//   SP  = |P(pred) & P(gold)| / |P(pred)|          span precision
//   MR  = |P(pred) & P(gold_major)| / |P(gold_major)|   major recall
//   MCC over OK/BAD word tags, BAD being the positive class.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"
#include "mqmkit/word_tags.hpp"

namespace mqmkit {

using PositionalSet = std::set<std::size_t>;

struct PositionalSetStats {
  // Spans without offsets, or on the other side of the segment.
  std::size_t skipped_spans = 0;
  // Word count of every counted span, in input order.
  std::vector<std::size_t> span_words;
};

// Word indices of `text` touched by the non-neutral spans. Throws
// OffsetError for offsets outside `text`.
inline PositionalSet positional_set(std::span<const ErrorAnnotation> spans,
                                    std::string_view text,
                                    PositionalSetStats* stats = nullptr,
                                    TextSide side = TextSide::kCandidate) {
  const auto tokens = text::tokenize(text);
  PositionalSet positions;
  for (const auto& s : spans) {
    if (s.severity == Severity::kNeutral) continue;
    if (s.side != side || !s.has_offsets()) {
      if (stats) ++stats->skipped_spans;
      continue;
    }
    if (*s.char_start >= *s.char_end || *s.char_end > text.size()) {
      throw OffsetError("span offsets out of range for text of length " +
                        std::to_string(text.size()));
    }
    std::size_t words = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (overlaps(tokens[i], *s.char_start, *s.char_end)) {
        positions.insert(i);
        ++words;
      }
    }
    if (stats) stats->span_words.push_back(words);
  }
  return positions;
}

inline std::size_t intersection_size(const PositionalSet& a, const PositionalSet& b) {
  std::size_t n = 0;
  for (auto i : a) n += b.count(i);
  return n;
}

// Undefined (nullopt) when `pred` is empty.
inline std::optional<double> span_precision(const PositionalSet& pred,
                                            const PositionalSet& gold) {
  if (pred.empty()) return std::nullopt;
  return static_cast<double>(intersection_size(pred, gold)) /
         static_cast<double>(pred.size());
}

// `pred` covers every predicted error regardless of severity. Undefined
// when `gold_major` is empty.
inline std::optional<double> major_recall(const PositionalSet& pred,
                                          const PositionalSet& gold_major) {
  if (gold_major.empty()) return std::nullopt;
  return static_cast<double>(intersection_size(pred, gold_major)) /
         static_cast<double>(gold_major.size());
}

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    tn += o.tn;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

// BAD is the positive class. Throws LengthMismatch on different lengths.
inline ConfusionCounts confusion(const WordTagSequence& pred, const WordTagSequence& gold) {
  if (pred.tags.size() != gold.tags.size()) {
    throw LengthMismatch("predicted and gold tag sequences differ in length (" +
                         std::to_string(pred.tags.size()) + " vs " +
                         std::to_string(gold.tags.size()) + ")");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.tags.size(); ++i) {
    const bool p = pred.tags[i] == WordTag::kBad;
    const bool g = gold.tags[i] == WordTag::kBad;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

// Matthews correlation; 0 when any marginal is empty.
inline double mcc(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return std::clamp((tp * tn - fp * fn) / std::sqrt(denom), -1.0, 1.0);
}

inline double mcc(const WordTagSequence& pred, const WordTagSequence& gold) {
  return mcc(confusion(pred, gold));
}

enum class Averaging { kMicro, kMacro };

struct SpanSegmentResult {
  SegmentKey key;
  std::optional<double> sp;
  std::optional<double> mr;
  double mcc = 0.0;
};

struct SpanEvalResult {
  std::optional<double> sp;
  std::optional<double> mr;
  double mcc = 0.0;
  std::size_t n_segments = 0;
  std::size_t n_undefined_sp = 0;
  std::size_t n_undefined_mr = 0;
  std::optional<double> avg_pred_span_words;
  std::optional<double> avg_gold_span_words;
  std::size_t skipped_pred_spans = 0;
  std::size_t skipped_gold_spans = 0;
  Averaging averaging = Averaging::kMicro;
  std::vector<SpanSegmentResult> segments;  // filled when requested

  Json to_json() const {
    Json j;
    j["sp"] = optional_number(sp);
    j["mr"] = optional_number(mr);
    j["mcc"] = text::round4(mcc);
    j["n_segments"] = n_segments;
    j["n_undefined_sp"] = n_undefined_sp;
    j["n_undefined_mr"] = n_undefined_mr;
    j["avg_pred_span_words"] = optional_number(avg_pred_span_words);
    j["avg_gold_span_words"] = optional_number(avg_gold_span_words);
    j["skipped_pred_spans"] = skipped_pred_spans;
    j["skipped_gold_spans"] = skipped_gold_spans;
    j["averaging"] = averaging == Averaging::kMicro ? "micro" : "macro";
    if (!segments.empty()) {
      Json segs = Json::array();
      for (const auto& s : segments) {
        Json row;
        row["lp"] = s.key.lp;
        row["system_id"] = s.key.system_id;
        row["seg_id"] = s.key.seg_id;
        row["sp"] = optional_number(s.sp);
        row["mr"] = optional_number(s.mr);
        row["mcc"] = text::round4(s.mcc);
        segs.push_back(std::move(row));
      }
      j["segments"] = std::move(segs);
    }
    return j;
  }
};

// Corpus accumulator. Counts are pooled, so `merge` is associative and the
// order segments are added in does not matter.
class SpanEvaluator {
 public:
  void add(std::span<const ErrorAnnotation> pred, std::span<const ErrorAnnotation> gold,
           std::string_view candidate, SegmentKey key = {}) {
    PositionalSetStats pred_stats;
    PositionalSetStats gold_stats;
    std::vector<ErrorAnnotation> gold_major;
    for (const auto& g : gold) {
      if (g.severity == Severity::kMajor) gold_major.push_back(g);
    }
    const auto p = positional_set(pred, candidate, &pred_stats);
    const auto g = positional_set(gold, candidate, &gold_stats);
    const auto gm = positional_set(gold_major, candidate);

    Segment s;
    s.key = std::move(key);
    s.pred_hits = intersection_size(p, g);
    s.pred_size = p.size();
    s.major_hits = intersection_size(p, gm);
    s.major_size = gm.size();
    s.confusion = confusion(spans_to_word_tags(pred, candidate),
                            spans_to_word_tags(gold, candidate));
    segments_.push_back(std::move(s));

    skipped_pred_ += pred_stats.skipped_spans;
    skipped_gold_ += gold_stats.skipped_spans;
    for (auto w : pred_stats.span_words) pred_words_ += w;
    for (auto w : gold_stats.span_words) gold_words_ += w;
    pred_spans_ += pred_stats.span_words.size();
    gold_spans_ += gold_stats.span_words.size();
  }

  void merge(const SpanEvaluator& other) {
    segments_.insert(segments_.end(), other.segments_.begin(), other.segments_.end());
    skipped_pred_ += other.skipped_pred_;
    skipped_gold_ += other.skipped_gold_;
    pred_words_ += other.pred_words_;
    gold_words_ += other.gold_words_;
    pred_spans_ += other.pred_spans_;
    gold_spans_ += other.gold_spans_;
  }

  SpanEvalResult result(Averaging averaging = Averaging::kMicro,
                        bool per_segment = false) const {
    SpanEvalResult r;
    r.averaging = averaging;
    r.n_segments = segments_.size();
    r.skipped_pred_spans = skipped_pred_;
    r.skipped_gold_spans = skipped_gold_;
    std::uint64_t sp_num = 0, sp_den = 0, mr_num = 0, mr_den = 0;
    double sp_sum = 0.0, mr_sum = 0.0;
    ConfusionCounts pooled;
    for (const auto& s : segments_) {
      const auto sp = ratio(s.pred_hits, s.pred_size);
      const auto mr = ratio(s.major_hits, s.major_size);
      if (sp) sp_sum += *sp;
      else ++r.n_undefined_sp;
      if (mr) mr_sum += *mr;
      else ++r.n_undefined_mr;
      sp_num += s.pred_hits;
      sp_den += s.pred_size;
      mr_num += s.major_hits;
      mr_den += s.major_size;
      pooled += s.confusion;
      if (per_segment) r.segments.push_back({s.key, sp, mr, mcc(s.confusion)});
    }
    if (averaging == Averaging::kMicro) {
      r.sp = ratio(sp_num, sp_den);
      r.mr = ratio(mr_num, mr_den);
    } else {
      const auto defined_sp = r.n_segments - r.n_undefined_sp;
      const auto defined_mr = r.n_segments - r.n_undefined_mr;
      if (defined_sp > 0) r.sp = sp_sum / static_cast<double>(defined_sp);
      if (defined_mr > 0) r.mr = mr_sum / static_cast<double>(defined_mr);
    }
    r.mcc = mcc(pooled);
    r.avg_pred_span_words = ratio(pred_words_, pred_spans_);
    r.avg_gold_span_words = ratio(gold_words_, gold_spans_);
    return r;
  }

 private:
  struct Segment {
    SegmentKey key;
    std::uint64_t pred_hits = 0;
    std::uint64_t pred_size = 0;
    std::uint64_t major_hits = 0;
    std::uint64_t major_size = 0;
    ConfusionCounts confusion;
  };

  static std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }

  std::vector<Segment> segments_;
  std::uint64_t skipped_pred_ = 0;
  std::uint64_t skipped_gold_ = 0;
  std::uint64_t pred_words_ = 0;
  std::uint64_t gold_words_ = 0;
  std::uint64_t pred_spans_ = 0;
  std::uint64_t gold_spans_ = 0;
};

}  // namespace mqmkit
