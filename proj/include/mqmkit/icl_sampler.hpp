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

// In-context example selection: uniform sampling, score-stratified
// sampling, and stratified sampling with rejection criteria for AutoMQM.
// All samplers are deterministic given the pool, k and the seed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mqmkit/error.hpp"
#include "mqmkit/hash.hpp"
#include "mqmkit/json_io.hpp"
#include "mqmkit/loaders.hpp"
#include "mqmkit/prompting.hpp"
#include "mqmkit/text.hpp"

namespace mqmkit {

// Parallel-array form, readable by `load_pool_jsonl`.
inline Json to_json(const ICLExample& ex) {
  Json j = to_json(ex.segment);
  j["score"] = ex.score ? Json(*ex.score) : Json(nullptr);
  j["span"] = ex.spans;
  j["severity"] = ex.severities;
  j["category"] = ex.categories;
  return j;
}

inline constexpr std::size_t kDefaultBucketCount = 5;

// Scored examples plus the interior boundaries that split the score range
// into buckets. Bucket i holds scores in [edge[i-1], edge[i]).
class ExamplePool {
 public:
  ExamplePool() = default;

  ExamplePool(std::vector<ICLExample> entries, std::vector<double> bucket_edges)
      : entries_(std::move(entries)), edges_(std::move(bucket_edges)) {
    for (const auto& e : entries_) {
      if (!e.score || !std::isfinite(*e.score)) {
        throw DataError("pool entry " + e.segment.key().to_string() +
                        " has no finite score");
      }
    }
    if (!std::is_sorted(edges_.begin(), edges_.end())) {
      throw ConfigError("bucket edges must be ascending");
    }
  }

  // `n` equal-width buckets over the observed score span.
  static ExamplePool with_equal_width_buckets(std::vector<ICLExample> entries,
                                              std::size_t n = kDefaultBucketCount) {
    if (n == 0) throw ConfigError("bucket count must be positive");
    std::vector<double> edges;
    if (!entries.empty()) {
      double lo = INFINITY;
      double hi = -INFINITY;
      for (const auto& e : entries) {
        if (!e.score) continue;
        lo = std::min(lo, *e.score);
        hi = std::max(hi, *e.score);
      }
      if (lo < hi) {
        const double width = (hi - lo) / static_cast<double>(n);
        for (std::size_t i = 1; i < n; ++i) edges.push_back(lo + width * static_cast<double>(i));
      }
    }
    return ExamplePool(std::move(entries), std::move(edges));
  }

  const std::vector<ICLExample>& entries() const { return entries_; }
  const std::vector<double>& bucket_edges() const { return edges_; }
  std::size_t size() const { return entries_.size(); }

  std::size_t bucket_of(double score) const {
    return static_cast<std::size_t>(
        std::upper_bound(edges_.begin(), edges_.end(), score) - edges_.begin());
  }

  // Entry indices of each non-empty bucket, in bucket order.
  std::vector<std::vector<std::size_t>> buckets() const {
    std::vector<std::vector<std::size_t>> all(edges_.size() + 1);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      all[bucket_of(*entries_[i].score)].push_back(i);
    }
    std::erase_if(all, [](const auto& b) { return b.empty(); });
    return all;
  }

  // SHA-256 over the canonical JSON form of the entries and edges.
  std::string content_hash() const {
    Json j = Json::array();
    for (const auto& e : entries_) j.push_back(to_json(e));
    Json all;
    all["entries"] = std::move(j);
    all["edges"] = edges_;
    return sha256_hex(all.dump());
  }

 private:
  std::vector<ICLExample> entries_;
  std::vector<double> edges_;
};

// Rejection thresholds for AutoMQM example sets.
struct RejectionConfig {
  long min_errors = 3;
  long majmin_threshold = 2;
  long cat_diversity = 2;
  long min_clen = 20;
  long max_clen = 400;

  void validate() const {
    if (min_errors <= 0 || majmin_threshold <= 0 || cat_diversity <= 0 || min_clen <= 0 ||
        max_clen <= 0) {
      throw ConfigError("rejection thresholds must be positive integers");
    }
  }
};

// True iff the example set passes every rejection check: aligned error
// lists; at least `min_errors` errors in total; |major - minor| within
// `majmin_threshold`; at least `cat_diversity` distinct top-level
// categories (text before the first '/'); and every source, reference and
// candidate between `min_clen` and `max_clen` code points long. Severities
// compare exactly against "major" / "minor". Absent references are skipped
// in the length check.
inline bool check_icl_set(std::span<const ICLExample> examples,
                          const RejectionConfig& config = {}) {
  for (const auto& ex : examples) {
    if (!ex.lists_aligned()) return false;
  }

  long total = 0;
  long major = 0;
  long minor = 0;
  for (const auto& ex : examples) {
    total += static_cast<long>(ex.severities.size());
    for (const auto& s : ex.severities) {
      if (s == "major") ++major;
      if (s == "minor") ++minor;
    }
  }
  if (total < config.min_errors) return false;
  if (std::abs(major - minor) > config.majmin_threshold) return false;

  std::set<std::string> types;
  for (const auto& ex : examples) {
    for (const auto& c : ex.categories) types.insert(c.substr(0, c.find('/')));
  }
  if (static_cast<long>(types.size()) < config.cat_diversity) return false;

  std::optional<long> top;
  std::optional<long> bottom;
  for (const auto& ex : examples) {
    std::vector<long> lens{static_cast<long>(text::utf8_length(ex.segment.source)),
                           static_cast<long>(text::utf8_length(ex.segment.candidate))};
    if (ex.segment.reference) {
      lens.push_back(static_cast<long>(text::utf8_length(*ex.segment.reference)));
    }
    const auto [lo, hi] = std::minmax_element(lens.begin(), lens.end());
    top = std::max(top.value_or(*hi), *hi);
    bottom = std::min(bottom.value_or(*lo), *lo);
  }
  if (top && (*top > config.max_clen || *bottom < config.min_clen)) return false;
  return true;
}

namespace detail {

using SamplerRng = std::mt19937_64;

inline std::vector<ICLExample> pick(const ExamplePool& pool,
                                    const std::vector<std::size_t>& indices) {
  std::vector<ICLExample> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(pool.entries()[i]);
  return out;
}

inline void require_capacity(const ExamplePool& pool, std::size_t k) {
  if (k > pool.size()) {
    throw PoolTooSmall("requested " + std::to_string(k) + " examples from a pool of " +
                       std::to_string(pool.size()));
  }
}

inline std::vector<std::size_t> draw_stratified(const ExamplePool& pool, std::size_t k,
                                                SamplerRng& rng) {
  auto buckets = pool.buckets();
  for (auto& b : buckets) std::shuffle(b.begin(), b.end(), rng);
  std::vector<std::size_t> cursor(buckets.size(), 0);
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  while (chosen.size() < k) {
    std::vector<std::size_t> order;
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      if (cursor[b] < buckets[b].size()) order.push_back(b);
    }
    std::shuffle(order.begin(), order.end(), rng);
    for (auto b : order) {
      if (chosen.size() == k) break;
      chosen.push_back(buckets[b][cursor[b]++]);
    }
  }
  return chosen;
}

}  // namespace detail

// k distinct entries drawn uniformly without replacement.
inline std::vector<ICLExample> sample_uniform(const ExamplePool& pool, std::size_t k,
                                              std::uint64_t seed) {
  detail::require_capacity(pool, k);
  detail::SamplerRng rng(seed);
  std::vector<std::size_t> idx(pool.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, idx.size() - 1);
    std::swap(idx[i], idx[dist(rng)]);
  }
  idx.resize(k);
  return detail::pick(pool, idx);
}

// Round-robin over the non-empty score buckets, one example per bucket per
// round with the bucket order reshuffled every round.
inline std::vector<ICLExample> sample_stratified(const ExamplePool& pool, std::size_t k,
                                                 std::uint64_t seed) {
  detail::require_capacity(pool, k);
  detail::SamplerRng rng(seed);
  return detail::pick(pool, detail::draw_stratified(pool, k, rng));
}

inline constexpr std::size_t kDefaultMaxAttempts = 1000;

// Draws stratified sets until one passes `check_icl_set`. Throws
// RejectionExhausted after `max_attempts` rejected draws.
inline std::vector<ICLExample> sample_automqm_set(const ExamplePool& pool, std::size_t k,
                                                  const RejectionConfig& config,
                                                  std::uint64_t seed,
                                                  std::size_t max_attempts = kDefaultMaxAttempts) {
  config.validate();
  detail::require_capacity(pool, k);
  detail::SamplerRng rng(seed);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    auto examples = detail::pick(pool, detail::draw_stratified(pool, k, rng));
    if (check_icl_set(examples, config)) return examples;
  }
  throw RejectionExhausted("no example set of size " + std::to_string(k) +
                           " passed the rejection criteria in " +
                           std::to_string(max_attempts) + " attempts");
}

// Pool JSONL: a segment object plus `score` and the gold errors, either as
// `errors: [{span, severity, category}]` or as parallel `span`, `severity`,
// `category` arrays. Severities are lowercased.
inline std::vector<ICLExample> load_pool_jsonl(const std::string& path) {
  std::vector<ICLExample> out;
  for (const auto& line : detail::read_lines(path)) {
    try {
      Json j = Json::parse(line.text);
      ICLExample ex;
      ex.segment = segment_from_json(j);
      ex.score = detail::optional_number_field(j, "score");
      if (!ex.score) throw DataError("pool entry has no score");
      auto lowered = [](const Json& v) {
        return text::to_lower(text::trim(v.get<std::string>()));
      };
      if (j.contains("errors")) {
        for (const auto& e : j.at("errors")) {
          ex.spans.push_back(e.at("span").get<std::string>());
          ex.severities.push_back(lowered(e.at("severity")));
          ex.categories.push_back(e.value("category", std::string()));
        }
      } else {
        for (const auto& v : j.value("span", Json::array())) ex.spans.push_back(v.get<std::string>());
        for (const auto& v : j.value("severity", Json::array())) ex.severities.push_back(lowered(v));
        for (const auto& v : j.value("category", Json::array())) {
          ex.categories.push_back(v.get<std::string>());
        }
      }
      out.push_back(std::move(ex));
    } catch (const Json::exception& e) {
      throw SchemaError(path, line.number, e.what());
    } catch (const DataError& e) {
      throw SchemaError(path, line.number, e.what());
    }
  }
  return out;
}

}  // namespace mqmkit
