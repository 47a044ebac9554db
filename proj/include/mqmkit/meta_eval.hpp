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

// Score-level meta-evaluation: system-level pairwise accuracy, segment-level
// Pearson correlation, group-by-item pairwise accuracy with tie calibration
// (acc*), equal-count score bucketing, and score histograms.
//
// All statistics assume higher is better on both sides. `build_report`
// orients MQM penalties accordingly.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/mqm.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

struct ReportEntry {
  SegmentKey key;
  double metric = 0.0;
  double gold = 0.0;
};

struct Exclusion {
  SegmentKey key;
  std::string reason;
};

// Paired metric and gold scores per (lp, system, segment).
class MetricReport {
 public:
  void add(SegmentKey key, double metric, double gold) {
    if (!std::isfinite(metric) || !std::isfinite(gold)) {
      exclude(std::move(key), "non-finite score");
      return;
    }
    if (!keys_.insert(key).second) throw DataError("duplicate report entry " + key.to_string());
    entries_.push_back({std::move(key), metric, gold});
  }

  void exclude(SegmentKey key, std::string reason) {
    exclusions_.push_back({std::move(key), std::move(reason)});
  }

  const std::vector<ReportEntry>& entries() const { return entries_; }
  const std::vector<Exclusion>& exclusions() const { return exclusions_; }

  std::vector<std::string> lps() const {
    std::set<std::string> out;
    for (const auto& e : entries_) out.insert(e.key.lp);
    return {out.begin(), out.end()};
  }

  std::vector<ReportEntry> entries_for(const std::string& lp) const {
    std::vector<ReportEntry> out;
    for (const auto& e : entries_) {
      if (e.key.lp == lp) out.push_back(e);
    }
    return out;
  }

 private:
  std::vector<ReportEntry> entries_;
  std::vector<Exclusion> exclusions_;
  std::set<SegmentKey> keys_;
};

// Higher-is-better score of one segment across raters: the negated mean
// MQM penalty when the assessments carry derived scores, else the mean raw
// score. Returns nullopt, with a reason, when no usable score exists.
inline std::optional<double> oriented_score(std::span<const SegmentAssessment> raters,
                                            std::string* reason = nullptr) {
  auto fail = [&](const char* why) -> std::optional<double> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  if (raters.empty()) return fail("no ratings");
  const bool derived = raters.front().derived_score.has_value();
  for (const auto& r : raters) {
    if (!r.score()) return fail("missing score");
    if (r.derived_score.has_value() != derived) return fail("mixed derived and raw scores");
  }
  const double mean = aggregate_raters(raters);
  return derived ? -mean : mean;
}

// Joins metric and gold assessments on (lp, system, seg_id). Keys present on
// one side only, or without a usable score, become exclusions.
inline MetricReport build_report(std::span<const SegmentAssessment> metric,
                                 std::span<const SegmentAssessment> gold) {
  std::map<SegmentKey, std::vector<SegmentAssessment>> by_key_metric;
  std::map<SegmentKey, std::vector<SegmentAssessment>> by_key_gold;
  for (const auto& a : metric) by_key_metric[a.key].push_back(a);
  for (const auto& a : gold) by_key_gold[a.key].push_back(a);

  MetricReport report;
  for (const auto& [key, raters] : by_key_metric) {
    auto g = by_key_gold.find(key);
    if (g == by_key_gold.end()) {
      report.exclude(key, "no gold score");
      continue;
    }
    std::string why;
    auto m = oriented_score(raters, &why);
    if (!m) {
      report.exclude(key, "metric: " + why);
      continue;
    }
    auto gs = oriented_score(g->second, &why);
    if (!gs) {
      report.exclude(key, "gold: " + why);
      continue;
    }
    report.add(key, *m, *gs);
  }
  for (const auto& [key, raters] : by_key_gold) {
    if (!by_key_metric.count(key)) report.exclude(key, "no metric score");
  }
  return report;
}

// ---------------------------------------------------------------------------
// System level.

struct SystemLevelScores {
  std::string lp;
  std::map<std::string, double> metric;
  std::map<std::string, double> gold;
};

// Per-system means of the segment scores of each language pair. An empty
// `lps` means every language pair in the report.
inline std::vector<SystemLevelScores> system_level_scores(const MetricReport& report,
                                                          std::vector<std::string> lps = {}) {
  if (lps.empty()) lps = report.lps();
  std::vector<SystemLevelScores> out;
  for (const auto& lp : lps) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_system;
    for (const auto& e : report.entries_for(lp)) {
      per_system[e.key.system_id].first.push_back(e.metric);
      per_system[e.key.system_id].second.push_back(e.gold);
    }
    SystemLevelScores s;
    s.lp = lp;
    for (const auto& [sys, scores] : per_system) {
      s.metric[sys] = system_score(scores.first);
      s.gold[sys] = system_score(scores.second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct SystemAccuracyResult {
  double accuracy = 0.0;
  // Pairs compared, i.e. all unordered pairs minus exact gold ties.
  std::size_t n_pairs = 0;
  std::size_t n_gold_ties = 0;
  std::size_t n_total_pairs = 0;
};

inline int sign(double x) { return (x > 0.0) - (x < 0.0); }

// Fraction of system pairs, pooled over language pairs, that the metric
// orders the same way as the gold scores. Pairs tied in gold are excluded;
// a metric tie on a pair the gold orders counts as wrong.
inline SystemAccuracyResult system_accuracy(std::span<const SystemLevelScores> per_lp) {
  SystemAccuracyResult r;
  std::size_t agree = 0;
  for (const auto& lp : per_lp) {
    if (lp.gold.size() < 2) {
      throw TooFewSystems("language pair " + lp.lp + " has " + std::to_string(lp.gold.size()) +
                          " system(s); need at least 2");
    }
    std::vector<std::string> systems;
    for (const auto& [sys, g] : lp.gold) {
      if (!lp.metric.count(sys)) throw DataError("system " + sys + " has no metric score");
      systems.push_back(sys);
    }
    for (std::size_t i = 0; i < systems.size(); ++i) {
      for (std::size_t j = i + 1; j < systems.size(); ++j) {
        ++r.n_total_pairs;
        const int g = sign(lp.gold.at(systems[i]) - lp.gold.at(systems[j]));
        if (g == 0) {
          ++r.n_gold_ties;
          continue;
        }
        ++r.n_pairs;
        if (sign(lp.metric.at(systems[i]) - lp.metric.at(systems[j])) == g) ++agree;
      }
    }
  }
  if (r.n_pairs == 0) throw TooFewPairs("no system pairs with distinct gold scores");
  r.accuracy = static_cast<double>(agree) / static_cast<double>(r.n_pairs);
  return r;
}

inline SystemAccuracyResult system_accuracy(const MetricReport& report,
                                            std::vector<std::string> lps = {}) {
  auto scores = system_level_scores(report, std::move(lps));
  return system_accuracy(std::span<const SystemLevelScores>(scores));
}

// ---------------------------------------------------------------------------
// Segment level.

// Two-pass Pearson correlation. Throws DegenerateVariance for fewer than two
// points or zero variance on either side.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw LengthMismatch("pearson inputs differ in length");
  if (x.size() < 2) throw DegenerateVariance("pearson needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance("pearson input has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double pearson(const MetricReport& report, const std::string& lp) {
  std::vector<double> m, g;
  for (const auto& e : report.entries_for(lp)) {
    m.push_back(e.metric);
    g.push_back(e.gold);
  }
  return pearson(m, g);
}

struct ScorePair {
  double metric = 0.0;
  double gold = 0.0;
};

struct AccStarResult {
  double acc_star = 0.0;
  double epsilon = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_items = 0;
};

// Pairwise accuracy with tie calibration over item groups (translations of
// the same source by different systems). Within an item a pair is correct
// when both metric and gold tie, or neither ties and they agree on order;
// the metric ties iff |metric difference| <= epsilon. The score is the mean
// over items of per-item accuracy. Epsilon is swept over 0 and the midpoints
// between consecutive distinct |metric differences| (the lower value when
// the two are adjacent doubles), plus the largest difference; the smallest
// maximizing epsilon is returned. Items with fewer than two members are
// ignored.
inline AccStarResult pairwise_accuracy_star(const std::vector<std::vector<ScorePair>>& items) {
  struct Pair {
    double dm;
    std::size_t item;
    int correct_untied;  // outcome when the metric does not tie
    int correct_tied;    // outcome when it does
  };
  std::vector<Pair> pairs;
  std::vector<std::size_t> pairs_per_item;
  for (const auto& group : items) {
    if (group.size() < 2) continue;
    const std::size_t item = pairs_per_item.size();
    std::size_t n = 0;
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        const double diff_m = group[a].metric - group[b].metric;
        const int g = sign(group[a].gold - group[b].gold);
        const int m = sign(diff_m);
        pairs.push_back({std::abs(diff_m), item, (g != 0 && m == g) ? 1 : 0, g == 0 ? 1 : 0});
        ++n;
      }
    }
    pairs_per_item.push_back(n);
  }
  if (pairs.empty()) throw TooFewPairs("no item has translations from two systems");

  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dm < b.dm; });

  // Start with no pair tied, then flip pairs to "tied" one group of equal
  // |metric difference| at a time. Each state is scored directly so adjacent
  // doubles whose midpoint rounds onto a neighbour are not skipped.
  std::vector<long> correct(pairs_per_item.size(), 0);
  for (const auto& p : pairs) correct[p.item] += p.correct_untied;

  const double n_items = static_cast<double>(pairs_per_item.size());
  auto objective = [&] {
    double sum = 0.0;
    for (std::size_t i = 0; i < correct.size(); ++i) {
      sum += static_cast<double>(correct[i]) / static_cast<double>(pairs_per_item[i]);
    }
    return sum / n_items;
  };

  AccStarResult best;
  best.acc_star = -1.0;
  auto consider = [&](double eps) {
    const double acc = objective();
    if (acc > best.acc_star) {
      best.acc_star = acc;
      best.epsilon = eps;
    }
  };
  std::size_t next = 0;
  auto flip_through = [&](double dm) {
    while (next < pairs.size() && pairs[next].dm <= dm) {
      correct[pairs[next].item] += pairs[next].correct_tied - pairs[next].correct_untied;
      ++next;
    }
  };
  flip_through(0.0);
  consider(0.0);
  while (next < pairs.size()) {
    const double dm = pairs[next].dm;
    flip_through(dm);
    if (next == pairs.size()) {
      // Ties every pair.
      consider(dm);
    } else {
      const double upper = pairs[next].dm;
      const double mid = dm + (upper - dm) / 2.0;
      consider(mid < upper ? mid : dm);
    }
  }
  best.n_pairs = pairs.size();
  best.n_items = pairs_per_item.size();
  return best;
}

// Groups the report's `lp` entries by seg_id.
inline AccStarResult pairwise_accuracy_star(const MetricReport& report, const std::string& lp) {
  std::map<std::string, std::vector<ScorePair>> by_item;
  std::set<std::string> systems;
  for (const auto& e : report.entries_for(lp)) {
    by_item[e.key.seg_id].push_back({e.metric, e.gold});
    systems.insert(e.key.system_id);
  }
  if (systems.size() < 2) {
    throw TooFewSystems("language pair " + lp + " needs at least 2 systems for acc*");
  }
  std::vector<std::vector<ScorePair>> items;
  for (auto& [id, group] : by_item) items.push_back(std::move(group));
  return pairwise_accuracy_star(items);
}

// ---------------------------------------------------------------------------
// Bucketing and histograms.

inline constexpr std::array<std::string_view, 5> kBucketLabels{
    "very bad", "bad", "ok", "good", "very good"};

struct BucketResult {
  // n-1 ascending interior boundaries; class c holds edges[c-1] < s < edges[c].
  std::vector<double> edges;
  std::vector<std::string> label_names;
  // 1-based class of every input score, in input order.
  std::vector<int> classes;
};

// Equal-count classes: boundaries sit at the quantile positions i*N/n of the
// sorted scores, moved to the nearest gap between distinct values when the
// quantile falls inside a run of ties. Each boundary is the midpoint of the
// values on either side of its gap.
inline BucketResult bucket_scores(std::span<const double> scores, std::size_t n_buckets = 5) {
  if (n_buckets == 0) throw ConfigError("bucket count must be positive");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  // gaps[j] = i means sorted[i-1] < sorted[i].
  std::vector<std::size_t> gaps;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i - 1] < sorted[i]) gaps.push_back(i);
  }
  if (gaps.size() + 1 < n_buckets) {
    throw TooFewDistinct(std::to_string(gaps.size() + (sorted.empty() ? 0 : 1)) +
                         " distinct value(s) for " + std::to_string(n_buckets) + " buckets");
  }

  BucketResult r;
  std::size_t lo = 0;  // first gap index still available
  const double n = static_cast<double>(sorted.size());
  for (std::size_t b = 1; b < n_buckets; ++b) {
    const double target = static_cast<double>(b) * n / static_cast<double>(n_buckets);
    // Leave enough gaps for the remaining boundaries.
    const std::size_t hi = gaps.size() - (n_buckets - 1 - b);
    std::size_t best = lo;
    for (std::size_t j = lo; j < hi; ++j) {
      if (std::abs(static_cast<double>(gaps[j]) - target) <
          std::abs(static_cast<double>(gaps[best]) - target)) {
        best = j;
      }
    }
    const std::size_t pos = gaps[best];
    r.edges.push_back(sorted[pos - 1] + (sorted[pos] - sorted[pos - 1]) / 2.0);
    lo = best + 1;
  }

  for (std::size_t c = 0; c < n_buckets; ++c) {
    r.label_names.push_back(n_buckets == kBucketLabels.size()
                                ? std::string(kBucketLabels[c])
                                : "class " + std::to_string(c + 1));
  }
  for (double s : scores) {
    r.classes.push_back(
        1 + static_cast<int>(std::upper_bound(r.edges.begin(), r.edges.end(), s) -
                             r.edges.begin()));
  }
  return r;
}

struct BinSpec {
  double start = 0.0;
  double width = 1.0;
  std::size_t count = 101;
  // Plotting hint only; counts are unaffected.
  bool log_scale = false;
};

struct Histogram {
  struct Bin {
    double start;
    double end;
    std::size_t count;
  };
  std::vector<Bin> bins;
  std::size_t below_range = 0;  // clamped into the first bin
  std::size_t above_range = 0;  // clamped into the last bin
  std::size_t non_finite = 0;   // not binned
  bool log_scale = false;

  std::size_t total() const {
    std::size_t t = non_finite;
    for (const auto& b : bins) t += b.count;
    return t;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "bin_start,bin_end,count\n";
    for (const auto& b : bins) {
      out << text::format_number(b.start) << "," << text::format_number(b.end) << ","
          << b.count << "\n";
    }
    return out.str();
  }
};

// Bins [start + i*width, start + (i+1)*width). Out-of-range values are
// clamped into the first / last bin and counted.
inline Histogram score_histogram(std::span<const double> scores, const BinSpec& spec = {}) {
  if (spec.count == 0 || !(spec.width > 0.0)) {
    throw ConfigError("histogram needs a positive bin count and width");
  }
  Histogram h;
  h.log_scale = spec.log_scale;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const double s = spec.start + spec.width * static_cast<double>(i);
    h.bins.push_back({s, s + spec.width, 0});
  }
  for (double v : scores) {
    if (!std::isfinite(v)) {
      ++h.non_finite;
      continue;
    }
    const double pos = std::floor((v - spec.start) / spec.width);
    std::size_t idx;
    if (pos < 0.0) {
      idx = 0;
      ++h.below_range;
    } else if (pos >= static_cast<double>(spec.count)) {
      idx = spec.count - 1;
      ++h.above_range;
    } else {
      idx = static_cast<std::size_t>(pos);
    }
    ++h.bins[idx].count;
  }
  return h;
}

}  // namespace mqmkit
