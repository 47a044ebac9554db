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


// mqmkit command-line tool.
//
//   mqmkit evaluate   --segments S --gold G --lp en-de --backend oracle --out DIR
//   mqmkit meta-eval  --assessments A --gold G --lp en-de [--out report.json]
//   mqmkit span-eval  --assessments A --gold G --lp en-de [--out spans.json]
//   mqmkit sample-icl --pool P --k 4 --sampling stratified_rejection --out set.json
//   mqmkit report     --assessments A [--out hist.csv]
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 backend or
// rejection-sampling exhaustion.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "mqmkit/mqmkit.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kExhausted = 4 };

struct Flags {
  std::string mode = "automqm";
  bool with_reference = true;
  std::string sampling = "stratified_rejection";
  std::string backend = "oracle";
  std::string endpoint;
  std::string api_key_env;
  std::string model;
  std::string replay;
  double rate_limit = 0.0;
  std::string averaging = "micro";
};

void add_gold_flags(CLI::App* cmd, mqmkit::RunConfig& c) {
  cmd->add_option("--gold", c.gold_path, "Gold assessments file");
  cmd->add_option("--gold-format", c.gold_format, "mqm | da | jsonl")
      ->check(CLI::IsMember({"mqm", "da", "jsonl"}));
  cmd->add_option("--lp", c.lp, "Language pair of TSV inputs, e.g. en-de");
}

void add_sampling_flags(CLI::App* cmd, mqmkit::RunConfig& c, Flags& f) {
  cmd->add_option("--pool", c.pool_path, "In-context example pool (JSONL)");
  cmd->add_option("--k", c.k, "Number of in-context examples");
  cmd->add_option("--sampling", f.sampling, "uniform | stratified | stratified_rejection")
      ->check(CLI::IsMember({"uniform", "stratified", "stratified_rejection"}));
  cmd->add_option("--seed", c.seed, "Sampling seed");
  cmd->add_option("--buckets", c.n_buckets, "Score buckets for stratified sampling");
  cmd->add_option("--max-attempts", c.max_attempts, "Rejection sampling attempts");
  cmd->add_option("--min-errors", c.rejection.min_errors);
  cmd->add_option("--majmin-threshold", c.rejection.majmin_threshold);
  cmd->add_option("--cat-diversity", c.rejection.cat_diversity);
  cmd->add_option("--min-clen", c.rejection.min_clen);
  cmd->add_option("--max-clen", c.rejection.max_clen);
}

void add_mode_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--mode", f.mode, "score | automqm")->check(CLI::IsMember({"score", "automqm"}));
  cmd->add_flag("--ref,!--no-ref", f.with_reference, "Include the reference in the prompt");
}

mqmkit::BackendConfig backend_config(const Flags& f) {
  if (f.backend.ends_with(".json")) return mqmkit::BackendConfig::load(f.backend);
  mqmkit::Json j;
  j["kind"] = f.backend;
  j["endpoint"] = f.endpoint;
  j["api_key_env"] = f.api_key_env;
  j["model"] = f.model;
  j["replay_path"] = f.replay;
  j["rate_limit_rps"] = f.rate_limit;
  // The oracle's gold store defaults to --gold; fill a placeholder so the
  // early validation passes and the run wires the real path in.
  if (f.backend == "oracle") j["gold"] = "<run gold>";
  auto c = mqmkit::BackendConfig::from_json(j);
  if (c.kind == mqmkit::BackendKind::kOracle) c.gold_path.clear();
  return c;
}

int run(int argc, char** argv) {
  CLI::App app{"MQM-style translation evaluation with LLMs"};
  app.require_subcommand(1);
  mqmkit::RunConfig c;
  Flags f;

  auto* evaluate = app.add_subcommand("evaluate", "Prompt a backend for every segment");
  add_mode_flags(evaluate, f);
  add_sampling_flags(evaluate, c, f);
  add_gold_flags(evaluate, c);
  evaluate->add_option("--segments", c.segments_path, "Segments (JSONL)");
  evaluate->add_option("--backend", f.backend, "oracle | replay | http_generic | config.json");
  evaluate->add_option("--endpoint", f.endpoint, "http_generic endpoint URL");
  evaluate->add_option("--api-key-env", f.api_key_env, "Variable holding the API key");
  evaluate->add_option("--model", f.model, "Model identifier");
  evaluate->add_option("--replay", f.replay, "Replay log for the replay backend");
  evaluate->add_option("--rate-limit", f.rate_limit, "Requests per second (0: unlimited)");
  evaluate->add_option("--parallelism", c.parallelism, "Concurrent requests");
  evaluate->add_option("--out", c.out, "Run directory")->required();

  auto* meta = app.add_subcommand("meta-eval", "Segment and system level meta-evaluation");
  add_gold_flags(meta, c);
  meta->add_option("--assessments", c.assessments_path, "Metric assessments (JSONL)")->required();
  meta->add_option("--out", c.out, "Report JSON (default: stdout)");

  auto* span = app.add_subcommand("span-eval", "Span precision, major recall and MCC");
  add_gold_flags(span, c);
  span->add_option("--assessments", c.assessments_path, "Predicted assessments (JSONL)")
      ->required();
  span->add_option("--segments", c.segments_path, "Segments (JSONL)");
  span->add_option("--averaging", f.averaging, "micro | macro")
      ->check(CLI::IsMember({"micro", "macro"}));
  span->add_flag("--per-segment", c.per_segment, "Emit per-segment rows");
  span->add_option("--out", c.out, "Result JSON (default: stdout)");

  auto* sample = app.add_subcommand("sample-icl", "Draw an in-context example set");
  add_mode_flags(sample, f);
  add_sampling_flags(sample, c, f);
  sample->add_option("--out", c.out, "Example set JSON (default: stdout)");

  auto* report = app.add_subcommand("report", "Score histogram as CSV");
  report->add_option("--assessments", c.assessments_path, "Assessments (JSONL)")->required();
  report->add_option("--bin-start", c.bins.start);
  report->add_option("--bin-width", c.bins.width);
  report->add_option("--bins", c.bins.count);
  report->add_option("--out", c.out, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    c.mode = mqmkit::parse_mode(f.mode);
    c.with_reference = f.with_reference;
    c.sampling = mqmkit::parse_sampling(f.sampling);
    c.averaging = f.averaging == "macro" ? mqmkit::Averaging::kMacro : mqmkit::Averaging::kMicro;
    c.command = app.get_subcommands().front()->get_name();

    if (evaluate->parsed()) {
      c.backend = backend_config(f);
      const auto s = mqmkit::cmd_evaluate(c);
      std::cerr << "evaluated " << s.n_segments << " segments: " << s.n_valid << " valid, "
                << s.n_invalid << " unparseable, " << s.n_backend_errors
                << " backend errors\n";
    } else if (meta->parsed()) {
      const auto j = mqmkit::cmd_meta_eval(c);
      if (c.out.empty()) std::cout << j.dump(2) << "\n";
    } else if (span->parsed()) {
      const auto j = mqmkit::cmd_span_eval(c);
      if (c.out.empty()) std::cout << j.dump(2) << "\n";
    } else if (sample->parsed()) {
      const auto j = mqmkit::cmd_sample_icl(c);
      if (c.out.empty()) std::cout << j.dump(2) << "\n";
    } else if (report->parsed()) {
      const auto csv = mqmkit::cmd_report(c);
      if (c.out.empty()) std::cout << csv;
    }
  } catch (const mqmkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const mqmkit::AuthError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const mqmkit::RejectionExhausted& e) {
    std::cerr << "rejection sampling exhausted: " << e.what() << "\n";
    return kExhausted;
  } catch (const mqmkit::BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExhausted;
  } catch (const mqmkit::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
