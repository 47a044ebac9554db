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
#include <sys/wait.h>

#include <cstdlib>
#include <map>

#include "mqmkit/pipeline.hpp"
#include "test_support.hpp"

namespace mqmkit {
namespace {

using testing::read_file;
using testing::ScratchDir;

const std::string kData = MQMKIT_DEMO_DATA;

RunConfig oracle_run(const std::string& out) {
  RunConfig c;
  c.gold_path = kData + "/gold_mqm.tsv";
  c.gold_format = "mqm";
  c.lp = "en-de";
  c.segments_path = kData + "/segments.jsonl";
  c.pool_path = kData + "/pool.jsonl";
  c.with_reference = false;
  c.k = 3;
  c.seed = 7;
  c.backend.kind = BackendKind::kOracle;
  c.out = out;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MQMKIT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Evaluate, OracleReproducesGoldScores) {
  ScratchDir dir("run");
  const auto config = oracle_run(dir.file("run"));
  const auto summary = cmd_evaluate(config);
  EXPECT_EQ(summary.n_segments, 12u);
  EXPECT_EQ(summary.n_valid, 12u);
  EXPECT_EQ(summary.n_backend_errors, 0u);

  const auto gold = load_mqm_corpus(config.gold_path, "en-de");
  std::map<SegmentKey, double> gold_score;
  for (const auto& g : gold.assessments) gold_score[g.key] = *g.derived_score;
  const auto got = load_assessments_jsonl(dir.file("run/assessments.jsonl"));
  ASSERT_EQ(got.size(), 12u);
  for (const auto& a : got) EXPECT_EQ(a.derived_score, gold_score.at(a.key)) << a.key.to_string();

  for (const char* f : {"assessments.jsonl", "diagnostics.json", "replay.jsonl",
                        "icl_examples.json", "run_config.json"}) {
    EXPECT_NE(read_file(dir.file(std::string("run/") + f)).find(config.hash()), std::string::npos)
        << f;
  }
}

TEST(Evaluate, ScoreModeWithoutExamples) {
  ScratchDir dir("score");
  auto config = oracle_run(dir.file("run"));
  config.mode = PromptMode::kScoreSqm;
  config.sampling = Sampling::kStratified;
  config.k = 0;
  config.with_reference = true;
  EXPECT_EQ(cmd_evaluate(config).n_valid, 12u);
  for (const auto& a : load_assessments_jsonl(dir.file("run/assessments.jsonl"))) {
    ASSERT_TRUE(a.raw_score);
    EXPECT_GE(*a.raw_score, 0.0);
    EXPECT_LE(*a.raw_score, 100.0);
  }
}

TEST(Evaluate, ConfigErrors) {
  ScratchDir dir("cfg");
  auto config = oracle_run(dir.file("run"));
  config.k = 0;
  EXPECT_THROW(cmd_evaluate(config), ConfigError);
  config = oracle_run(dir.file("run"));
  config.mode = PromptMode::kScoreSqm;
  EXPECT_THROW(cmd_evaluate(config), ConfigError);  // rejection sampling is AutoMQM only
  config = oracle_run(dir.file("run"));
  config.with_reference = true;
  EXPECT_THROW(cmd_evaluate(config), MissingReference);  // the pool has no references
}

TEST(Evaluate, ReplayRerunIsByteIdentical) {
  ScratchDir dir("replay");
  const auto first = oracle_run(dir.file("a"));
  cmd_evaluate(first);
  auto second = oracle_run(dir.file("b"));
  second.backend.kind = BackendKind::kReplay;
  second.backend.replay_path = dir.file("a/replay.jsonl");
  EXPECT_EQ(second.hash(), first.hash());
  cmd_evaluate(second);
  for (const char* f : {"assessments.jsonl", "diagnostics.json", "replay.jsonl",
                        "icl_examples.json"}) {
    EXPECT_EQ(read_file(dir.file(std::string("b/") + f)), read_file(dir.file(std::string("a/") + f)))
        << f;
  }
}

TEST(Evaluate, ParallelMatchesSequential) {
  ScratchDir dir("par");
  auto a = oracle_run(dir.file("a"));
  auto b = oracle_run(dir.file("b"));
  b.parallelism = 4;
  cmd_evaluate(a);
  cmd_evaluate(b);
  EXPECT_EQ(read_file(dir.file("a/assessments.jsonl")), read_file(dir.file("b/assessments.jsonl")));
}

TEST(MetaEval, OracleOutputsArePerfect) {
  ScratchDir dir("meta");
  auto config = oracle_run(dir.file("run"));
  cmd_evaluate(config);
  RunConfig meta = oracle_run("");
  meta.command = "meta-eval";
  meta.assessments_path = dir.file("run/assessments.jsonl");
  meta.out = dir.file("meta.json");
  const auto j = cmd_meta_eval(meta);
  EXPECT_EQ(j["segment_level"]["en-de"]["pearson"], 1.0);
  EXPECT_EQ(j["segment_level"]["en-de"]["acc_star"], 1.0);
  EXPECT_EQ(j["system_accuracy"], 1.0);
  EXPECT_EQ(j["system_pairs"], 3);
  EXPECT_EQ(j["n_excluded"], 0);
  EXPECT_EQ(j["config_hash"], meta.hash());
  EXPECT_EQ(Json::parse(read_file(meta.out)), j);
}

TEST(SpanEval, OracleOutputsArePerfect) {
  ScratchDir dir("span");
  cmd_evaluate(oracle_run(dir.file("run")));
  RunConfig span = oracle_run("");
  span.command = "span-eval";
  span.assessments_path = dir.file("run/assessments.jsonl");
  span.per_segment = true;
  const auto j = cmd_span_eval(span);
  EXPECT_EQ(j["sp"], 1.0);
  EXPECT_EQ(j["mr"], 1.0);
  EXPECT_EQ(j["mcc"], 1.0);
  EXPECT_EQ(j["n_segments"], 12);
  EXPECT_EQ(j["segments"].size(), 12u);
  EXPECT_EQ(j["n_without_gold"], 0);
}

TEST(SampleIcl, WritesExampleSetAndReportsExhaustion) {
  ScratchDir dir("icl");
  auto config = oracle_run(dir.file("set.json"));
  config.command = "sample-icl";
  const auto j = cmd_sample_icl(config);
  EXPECT_EQ(j["examples"].size(), 3u);
  EXPECT_EQ(Json::parse(read_file(config.out)), j);

  // Every entry shares one top-level category, so cat_diversity=2 fails.
  std::string pool;
  for (int i = 0; i < 8; ++i) {
    Json e{{"lp", "en-de"}, {"system_id", "p"}, {"seg_id", std::to_string(i)},
           {"source", std::string(30, 's')}, {"candidate", std::string(30, 'c')},
           {"score", i}, {"span", {"c", "c"}}, {"severity", {"major", "minor"}},
           {"category", {"accuracy/mistranslation", "accuracy/omission"}}};
    pool += e.dump() + "\n";
  }
  config.pool_path = dir.write("mono.jsonl", pool);
  config.max_attempts = 50;
  EXPECT_THROW(cmd_sample_icl(config), RejectionExhausted);
  EXPECT_EQ(run_cli("sample-icl --pool " + config.pool_path + " --k 3 --max-attempts 50"), 4);
  EXPECT_EQ(run_cli("sample-icl --pool " + config.pool_path + " --k 3 --cat-diversity 1"), 0);
}

TEST(Report, HistogramCsvWithProvenance) {
  ScratchDir dir("report");
  auto run = oracle_run(dir.file("run"));
  run.mode = PromptMode::kScoreSqm;
  run.sampling = Sampling::kUniform;
  run.k = 0;
  cmd_evaluate(run);
  RunConfig config;
  config.command = "report";
  config.assessments_path = dir.file("run/assessments.jsonl");
  config.bins = {0, 10, 11};
  const auto csv = cmd_report(config);
  EXPECT_EQ(csv.rfind("# config_hash=" + config.hash() + " seed=0", 0), 0u);
  EXPECT_NE(csv.find("\nbin_start,bin_end,count\n"), std::string::npos);
  std::size_t total = 0;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'b') continue;
    total += std::stoul(line.substr(line.rfind(',') + 1));
  }
  EXPECT_EQ(total, 12u);
}

TEST(RunConfig, HashCoversInputsNotOutputs) {
  const auto a = oracle_run("x");
  auto b = oracle_run("y");
  b.parallelism = 8;
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 8;
  EXPECT_NE(a.hash(), b.hash());
  ScratchDir dir("hash");
  auto c = oracle_run("x");
  c.segments_path = dir.write("s.jsonl", read_file(a.segments_path) + "\n");
  EXPECT_NE(a.hash(), c.hash());
}

TEST(Cli, ExitCodes) {
  ScratchDir dir("cli");
  const std::string common = " --gold " + kData + "/gold_mqm.tsv --lp en-de --segments " + kData +
                             "/segments.jsonl --pool " + kData + "/pool.jsonl --no-ref --k 3";
  EXPECT_EQ(run_cli("evaluate" + common + " --out " + dir.file("ok")), 0);
  EXPECT_EQ(run_cli("evaluate" + common + " --k 0 --out " + dir.file("k0")), 2);
  EXPECT_EQ(run_cli("evaluate --bogus-flag"), 2);
  EXPECT_EQ(run_cli("meta-eval --gold " + dir.write("bad.tsv", "nope\n") +
                    " --lp en-de --assessments " + dir.file("ok/assessments.jsonl")),
            3);
  EXPECT_EQ(run_cli("evaluate" + common + " --backend replay --replay " +
                    dir.write("empty.jsonl", "") + " --out " + dir.file("empty")),
            3);
  // Replay misses are per-segment backend errors, not a fatal exit.
  const std::string other =
      R"({"prompt_sha256":"00","prompt":"p","completion":"c","model":"","timestamp":""})";
  EXPECT_EQ(run_cli("evaluate" + common + " --backend replay --replay " +
                    dir.write("other.jsonl", other + "\n") + " --out " + dir.file("miss")),
            0);
  EXPECT_NE(read_file(dir.file("miss/diagnostics.json")).find("\"n_backend_errors\": 12"),
            std::string::npos);
  EXPECT_EQ(run_cli("evaluate" + common + " --backend http_generic --endpoint http://127.0.0.1:1/x"
                    " --api-key-env MQMKIT_SURELY_UNSET_VAR --out " + dir.file("auth")),
            2);
  EXPECT_EQ(run_cli("meta-eval --gold " + kData + "/gold_mqm.tsv --lp en-de --assessments " +
                    dir.file("ok/assessments.jsonl") + " --out " + dir.file("meta.json")),
            0);
  EXPECT_EQ(Json::parse(read_file(dir.file("meta.json")))["system_accuracy"], 1.0);
}

}  // namespace
}  // namespace mqmkit
