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

#include <map>
#include <random>
#include <set>

#include "generators.hpp"
#include "mqmkit/icl_sampler.hpp"
#include "test_support.hpp"

namespace mqmkit {
namespace {

using testing::make_segment;

ICLExample scored(std::size_t i, double score) {
  ICLExample ex;
  ex.segment = make_segment("pool", std::to_string(i), "s", "c");
  ex.score = score;
  return ex;
}

std::vector<ICLExample> scored_pool(std::size_t n) {
  std::vector<ICLExample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(scored(i, static_cast<double>(i % 25)));
  return out;
}

std::set<std::string> ids(const std::vector<ICLExample>& v) {
  std::set<std::string> out;
  for (const auto& e : v) out.insert(e.segment.seg_id);
  return out;
}

// A pool entry whose texts are 30 code points long.
ICLExample annotated(std::size_t i, double score, std::vector<std::string> sevs,
                     std::vector<std::string> cats) {
  ICLExample ex;
  const std::string text(30, 'a');
  ex.segment = make_segment("pool", std::to_string(i), text, text, text);
  ex.spans.assign(sevs.size(), "a");
  ex.severities = std::move(sevs);
  ex.categories = std::move(cats);
  ex.score = score;
  return ex;
}

TEST(SampleUniform, Basics) {
  const auto pool = ExamplePool::with_equal_width_buckets(scored_pool(100));
  EXPECT_TRUE(sample_uniform(pool, 0, 1).empty());
  const auto a = sample_uniform(pool, 4, 42);
  const auto b = sample_uniform(pool, 4, 42);
  EXPECT_EQ(ids(a), ids(b));
  EXPECT_EQ(ids(a).size(), 4u);
  const auto small = ExamplePool::with_equal_width_buckets(scored_pool(4));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_EQ(ids(sample_uniform(small, 4, seed)), (std::set<std::string>{"0", "1", "2", "3"}));
  }
  EXPECT_THROW(sample_uniform(small, 5, 0), PoolTooSmall);
}

TEST(ExamplePool, EqualWidthBuckets) {
  const auto pool = ExamplePool::with_equal_width_buckets(scored_pool(25));
  const std::vector<double> edges{4.8, 9.6, 14.4, 19.2};
  ASSERT_EQ(pool.bucket_edges().size(), edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) EXPECT_NEAR(pool.bucket_edges()[i], edges[i], 1e-12);
  ASSERT_EQ(pool.buckets().size(), 5u);
  EXPECT_EQ(pool.bucket_of(24.0), 4u);
  EXPECT_EQ(pool.bucket_of(0.0), 0u);
  std::vector<ICLExample> bad{scored(0, NAN)};
  EXPECT_THROW(ExamplePool::with_equal_width_buckets(bad), DataError);
  EXPECT_THROW(ExamplePool(scored_pool(3), {2.0, 1.0}), ConfigError);
  EXPECT_EQ(pool.content_hash(), ExamplePool::with_equal_width_buckets(scored_pool(25)).content_hash());
}

TEST(SampleStratified, OnePerBucket) {
  const auto pool = ExamplePool::with_equal_width_buckets(scored_pool(100));
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::set<std::size_t> buckets;
    for (const auto& e : sample_stratified(pool, 5, seed)) buckets.insert(pool.bucket_of(*e.score));
    EXPECT_EQ(buckets.size(), 5u);
  }
}

TEST(SampleStratified, CountsWithinOne) {
  const auto pool = ExamplePool::with_equal_width_buckets(scored_pool(100));
  for (std::size_t k = 0; k <= 40; ++k) {
    std::map<std::size_t, std::size_t> counts;
    for (const auto& e : sample_stratified(pool, k, k * 7)) ++counts[pool.bucket_of(*e.score)];
    if (k >= 5) {
      ASSERT_EQ(counts.size(), 5u);
    }
    std::size_t lo = k, hi = 0;
    for (std::size_t b = 0; b < 5; ++b) {
      lo = std::min(lo, counts[b]);
      hi = std::max(hi, counts[b]);
    }
    EXPECT_LE(hi - lo, 1u) << "k=" << k;
  }
}

TEST(SampleStratified, SingleBucketActsUniform) {
  std::vector<ICLExample> same;
  for (std::size_t i = 0; i < 10; ++i) same.push_back(scored(i, 7.0));
  const auto pool = ExamplePool::with_equal_width_buckets(same);
  EXPECT_EQ(pool.buckets().size(), 1u);
  EXPECT_EQ(ids(sample_stratified(pool, 10, 3)).size(), 10u);
  EXPECT_EQ(ids(sample_stratified(pool, 3, 9)), ids(sample_stratified(pool, 3, 9)));
}

TEST(CheckIclSet, SpecExamples) {
  std::vector<ICLExample> two{annotated(0, 1, {"major"}, {"accuracy"}),
                              annotated(1, 2, {"minor"}, {"fluency"})};
  EXPECT_FALSE(check_icl_set(two));
  std::vector<ICLExample> lopsided{
      annotated(0, 1, {"major", "major", "major", "major", "minor"},
                {"accuracy", "fluency", "style", "accuracy", "fluency"})};
  EXPECT_FALSE(check_icl_set(lopsided));
  std::vector<ICLExample> good{annotated(0, 1, {"major", "minor"}, {"accuracy/mistranslation", "fluency"}),
                               annotated(1, 2, {"major", "minor"}, {"accuracy", "fluency/grammar"})};
  EXPECT_TRUE(check_icl_set(good));
}

TEST(CheckIclSet, LengthBounds) {
  auto ex = annotated(0, 1, {"major", "minor", "minor"}, {"accuracy", "fluency", "style"});
  auto with_len = [&](std::size_t n) {
    auto e = ex;
    e.segment.candidate = std::string(n, 'b');
    return std::vector{e};
  };
  EXPECT_FALSE(check_icl_set(with_len(19)));
  EXPECT_TRUE(check_icl_set(with_len(20)));
  EXPECT_TRUE(check_icl_set(with_len(400)));
  EXPECT_FALSE(check_icl_set(with_len(401)));
  // Code points, not bytes: 20 two-byte characters pass.
  auto wide = ex;
  wide.segment.candidate.clear();
  for (int i = 0; i < 20; ++i) wide.segment.candidate += "ü";
  EXPECT_TRUE(check_icl_set(std::vector{wide}));
}

TEST(CheckIclSet, AgreesWithTransliteration) {
  std::mt19937_64 rng(99);
  std::size_t accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto [examples, rows] = testing::random_icl_set(rng);
    const bool expected = oracle::check_icl_set(rows);
    ASSERT_EQ(check_icl_set(examples), expected) << "trial " << trial;
    accepted += expected;
  }
  EXPECT_GT(accepted, 0u);
}

TEST(SampleAutoMqmSet, AcceptsAndReproduces) {
  std::vector<ICLExample> entries;
  const std::vector<std::string> cats{"accuracy", "fluency", "style"};
  for (std::size_t i = 0; i < 30; ++i) {
    std::vector<std::string> sevs, cs;
    for (std::size_t e = 0; e < i % 3; ++e) {
      sevs.push_back(e % 2 ? "minor" : "major");
      cs.push_back(cats[(i + e) % 3]);
    }
    entries.push_back(annotated(i, static_cast<double>(i % 10), sevs, cs));
  }
  const auto pool = ExamplePool::with_equal_width_buckets(entries);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto set = sample_automqm_set(pool, 4, {}, seed);
    EXPECT_TRUE(check_icl_set(set));
    EXPECT_EQ(ids(set), ids(sample_automqm_set(pool, 4, {}, seed)));
  }
}

TEST(SampleAutoMqmSet, Errors) {
  std::vector<ICLExample> clean;
  for (std::size_t i = 0; i < 10; ++i) clean.push_back(annotated(i, static_cast<double>(i), {}, {}));
  const auto pool = ExamplePool::with_equal_width_buckets(clean);
  EXPECT_THROW(sample_automqm_set(pool, 4, {}, 1, 50), RejectionExhausted);
  EXPECT_THROW(sample_automqm_set(pool, 11, {}, 1), PoolTooSmall);
  RejectionConfig bad;
  bad.min_clen = 0;
  EXPECT_THROW(sample_automqm_set(pool, 4, bad, 1), ConfigError);
}

TEST(LoadPoolJsonl, BothForms) {
  testing::ScratchDir dir("pool");
  const auto path = dir.write(
      "p.jsonl",
      R"({"lp":"en-de","system_id":"p","seg_id":"1","source":"s","candidate":"c","score":3,"errors":[{"span":"c","severity":"Major","category":"Accuracy"}]})"
      "\n"
      R"({"lp":"en-de","system_id":"p","seg_id":"2","source":"s","candidate":"c","score":0,"span":["c"],"severity":["MINOR"],"category":["Fluency/Grammar"]})"
      "\n");
  const auto pool = load_pool_jsonl(path);
  ASSERT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool[0].severities, std::vector<std::string>{"major"});
  EXPECT_EQ(pool[0].categories, std::vector<std::string>{"Accuracy"});
  EXPECT_EQ(pool[1].severities, std::vector<std::string>{"minor"});
  EXPECT_EQ(pool[1].spans, std::vector<std::string>{"c"});
  EXPECT_THROW(load_pool_jsonl(dir.write("n.jsonl",
                                         R"({"lp":"en-de","system_id":"p","seg_id":"1","source":"s","candidate":"c"})"
                                         "\n")),
               SchemaError);
  const auto demo = load_pool_jsonl(std::string(MQMKIT_DEMO_DATA) + "/pool.jsonl");
  EXPECT_EQ(demo.size(), 10u);
}

}  // namespace
}  // namespace mqmkit
