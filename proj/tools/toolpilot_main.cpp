// Copyright 2026 The Toolpilot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: one subcommand per pipeline stage.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "toolpilot/agent.hpp"
#include "toolpilot/backends.hpp"
#include "toolpilot/config.hpp"
#include "toolpilot/corpus.hpp"
#include "toolpilot/encoder.hpp"
#include "toolpilot/errors.hpp"
#include "toolpilot/eval.hpp"
#include "toolpilot/file_util.hpp"
#include "toolpilot/hashing.hpp"
#include "toolpilot/retriever.hpp"
#include "toolpilot/synthetic.hpp"
#include "toolpilot/training.hpp"

namespace fs = std::filesystem;
using namespace toolpilot;

namespace {

void Announce(const std::string& command, std::uint64_t seed,
              std::uint64_t config_hash) {
  std::cerr << "[toolpilot] " << command << " seed=" << seed
            << " config_hash=" << HexDigest(config_hash) << "\n";
}

RunConfig LoadConfig(const std::string& path) {
  return path.empty() ? RunConfig{} : RunConfig::Load(path);
}

std::string Fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config, pairs, apis, out_params, loss_csv;
  std::optional<int> epochs, batch_size;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
};

int TrainRetriever(const TrainArgs& a) {
  RunConfig cfg = LoadConfig(a.config);
  if (!a.pairs.empty()) cfg.paths.pairs = a.pairs;
  if (!a.apis.empty()) cfg.paths.apis = a.apis;
  if (!a.out_params.empty()) cfg.paths.params = a.out_params;
  if (a.epochs) cfg.training.epochs = *a.epochs;
  if (a.batch_size) cfg.training.batch_size = *a.batch_size;
  if (a.lr) cfg.training.learning_rate = *a.lr;
  if (a.seed) cfg.training.seed = *a.seed;
  cfg.Validate();
  if (cfg.paths.pairs.empty() || cfg.paths.apis.empty() ||
      cfg.paths.params.empty()) {
    throw ConfigError("--pairs, --apis and --out-params are required");
  }
  Announce("train-retriever", cfg.training.seed, cfg.Hash());

  const auto pairs = LoadPairs(cfg.paths.pairs);
  const auto apis = LoadApis(cfg.paths.apis);
  auto result =
      Train(pairs, apis, cfg.training, InitEncoder<double>(cfg.encoder));
  SaveEncoder(result.params, cfg.paths.params);
  if (!a.loss_csv.empty()) {
    WriteFileBytes(a.loss_csv, LossHistoryCsv(result.loss_history));
  }
  std::cout << "trained " << pairs.size() << " pairs over "
            << cfg.training.epochs << " epochs";
  if (!result.loss_history.empty()) {
    std::cout << ", loss " << Fixed4(result.loss_history.front()) << " -> "
              << Fixed4(result.loss_history.back());
  }
  std::cout << "\nencoder " << HexDigest(EncoderFingerprint(result.params))
            << " written to " << cfg.paths.params << "\n";
  return 0;
}

// ---------------------------------------------------------------- retrieval

std::vector<EvalQuery> LoadEvalQueries(const std::string& path) {
  const std::string text = ReadFileBytes(path);
  std::vector<EvalQuery> queries;
  if (SniffSchema(text) == "trajectory") {
    for (const auto& t : ParseTrajectories(text)) {
      queries.push_back({t.instruction, t.ApiIds()});
    }
  } else {
    for (const auto& p : ParsePairs(text)) {
      queries.push_back({p.instruction, {p.positive_api_id}});
    }
  }
  return queries;
}

struct EvalRetrieverArgs {
  std::string config, params, apis, eval, index;
  std::vector<int> ks{5, 10};
};

int EvalRetriever(const EvalRetrieverArgs& a) {
  RunConfig cfg = LoadConfig(a.config);
  if (!a.params.empty()) cfg.paths.params = a.params;
  if (!a.apis.empty()) cfg.paths.apis = a.apis;
  if (!a.index.empty()) cfg.paths.index = a.index;
  if (cfg.paths.params.empty() || cfg.paths.apis.empty() || a.eval.empty()) {
    throw ConfigError("--params, --apis and --eval are required");
  }
  Announce("eval-retriever", cfg.seed, cfg.Hash());
  const auto params = LoadEncoder(cfg.paths.params);
  const auto apis = LoadApis(cfg.paths.apis);
  const ApiIndex index = cfg.paths.index.empty()
                             ? BuildIndex(apis, params, cfg.include_parameters)
                             : LoadIndex(cfg.paths.index, params);
  const auto queries = LoadEvalQueries(a.eval);
  std::cout << "k,recall\n";
  for (int k : a.ks) {
    if (k < 1) throw ConfigError("k must be at least 1");
    int used = k;
    if (static_cast<std::size_t>(k) > index.size()) {
      used = static_cast<int>(index.size());
      std::cerr << "warning: k=" << k << " exceeds collection size "
                << index.size() << "; clamping to " << used << "\n";
    }
    std::cout << used << "," << Fixed4(RecallAtK(index, params, queries, used))
              << "\n";
  }
  return 0;
}

int BuildIndexCommand(const std::string& params_path,
                      const std::string& apis_path, const std::string& out,
                      bool include_parameters) {
  Announce("build-index", 0, Fnv1a64(params_path + "\n" + apis_path));
  const auto params = LoadEncoder(params_path);
  const auto apis = LoadApis(apis_path);
  const auto index = BuildIndex(apis, params, include_parameters);
  SaveIndex(index, out);
  std::cout << index.size() << " entries indexed for encoder "
            << HexDigest(index.params_fingerprint) << "\n";
  return 0;
}

// ---------------------------------------------------------------- agent

struct AgentArgs {
  std::string config, instruction, suite, trace_out, report_out, report_csv;
  std::string row;
  int jobs = 1;
  bool stamp_times = false;
};

struct LoadedComponents {
  EncoderParams params;
  std::vector<ApiRecord> apis;
  std::vector<DemoRecord> demos;
  ApiIndex index;
};

LoadedComponents LoadComponents(const RunConfig& cfg) {
  if (cfg.paths.apis.empty()) throw ConfigError("paths.apis is required");
  LoadedComponents c;
  if (cfg.paths.params.empty()) {
    std::cerr << "warning: paths.params unset; using an untrained encoder\n";
    c.params = InitEncoder<double>(cfg.encoder);
  } else {
    c.params = LoadEncoder(cfg.paths.params);
  }
  c.apis = LoadApis(cfg.paths.apis);
  if (!cfg.paths.demos.empty()) c.demos = LoadDemos(cfg.paths.demos);
  c.index = cfg.paths.index.empty()
                ? BuildIndex(c.apis, c.params, cfg.include_parameters)
                : LoadIndex(cfg.paths.index, c.params);
  return c;
}

int RunAgent(const AgentArgs& a) {
  RunConfig cfg = LoadConfig(a.config);
  if (!a.suite.empty()) cfg.paths.suite = a.suite;
  if (!a.row.empty()) cfg.suite_row = ParseAblationRow(a.row);
  cfg.Validate();
  if (a.jobs < 1) throw ConfigError("--jobs must be at least 1");
  Announce("run-agent", cfg.seed, cfg.Hash());

  const auto c = LoadComponents(cfg);
  const Pipeline pipeline(c.params, c.index, c.apis, c.demos, cfg.Pipeline());

  if (!a.instruction.empty()) {
    auto backend = MakeBackend(cfg.backend);
    MockToolRegistry registry(c.apis);
    const auto trace = pipeline.Run(a.instruction, *backend, registry);
    WriteFileBytes(a.trace_out, TraceToJson(trace).dump(2) + "\n");
    std::cout << "termination " << TerminationName(trace.termination) << ", "
              << trace.steps.size() << " steps\n";
    if (trace.final_answer) std::cout << "final answer: " << *trace.final_answer << "\n";
    return 0;
  }

  if (cfg.paths.suite.empty()) {
    throw ConfigError("either --instruction or --suite is required");
  }
  const auto golds = LoadTrajectories(cfg.paths.suite);
  CheckTrajectories(golds, c.apis);
  const auto factory = MakeBackendFactory(cfg.backend);
  std::vector<std::optional<std::string>> errors;
  const auto started = a.stamp_times ? std::optional(UtcTimestamp()) : std::nullopt;
  const auto traces = RunSuite(pipeline, golds, cfg.suite_row, factory,
                               cfg.seed, a.jobs, &errors);
  WriteFileBytes(a.trace_out, SerializeTraceSuite(traces));

  Json snapshot = cfg.ToJson();
  snapshot["config_hash"] = HexDigest(cfg.Hash());
  snapshot["row"] = AblationRowName(cfg.suite_row);
  auto report = ScoreSuite(std::string(AblationRowName(cfg.suite_row)) +
                               "-seed" + std::to_string(cfg.seed),
                           traces, golds, cfg.match_mode, std::move(snapshot));
  for (std::size_t i = 0; i < errors.size(); ++i) report.items[i].error = errors[i];
  report.started_at = started;
  if (a.stamp_times) report.finished_at = UtcTimestamp();
  if (!a.report_out.empty()) {
    WriteFileBytes(a.report_out, report.ToJson().dump(2) + "\n");
  }
  if (!a.report_csv.empty()) WriteFileBytes(a.report_csv, report.MetricsCsv());
  std::cout << "execution_accuracy(" << MatchModeName(cfg.match_mode)
            << ") = " << Fixed4(report.metrics["execution_accuracy"]) << " over "
            << golds.size() << " tasks\n";
  return 0;
}

int EvalAgent(const std::string& traces_path, const std::string& golds_path,
              const std::string& mode_name, const std::string& report_out) {
  const MatchMode mode = ParseMatchMode(mode_name);
  Announce("eval-agent", 0, Fnv1a64(traces_path + "\n" + golds_path + "\n" + mode_name));
  const auto traces = ParseTraceSuite(ReadFileBytes(traces_path));
  const auto golds = LoadTrajectories(golds_path);
  const auto report = ScoreSuite("eval-agent", traces, golds, mode);
  if (!report_out.empty()) {
    WriteFileBytes(report_out, report.ToJson().dump(2) + "\n");
  }
  std::cout << Fixed4(report.metrics.at("execution_accuracy")) << "\n";
  return 0;
}

// ---------------------------------------------------------------- data

struct AugmentArgs {
  std::string op, in, out, pool, lexicon;
  std::uint64_t seed = 0;
  std::size_t m = 1;
  double rate = 0.5;
};

// Sample i is augmented with seed + i.
int Augment(const AugmentArgs& a) {
  Announce("augment", a.seed,
           Fnv1a64(a.op + "\n" + a.in + "\n" + a.pool + "\n" + a.lexicon +
                   "\n" + std::to_string(a.m) + "\n" + std::to_string(a.rate)));
  const auto samples = LoadPromptSamples(a.in);
  std::vector<ApiRecord> pool;
  Lexicon lexicon;
  if (a.op == "inject") {
    if (a.pool.empty()) throw ConfigError("--pool is required for inject");
    pool = LoadApis(a.pool);
  } else if (a.op == "synonym") {
    if (a.lexicon.empty()) throw ConfigError("--lexicon is required for synonym");
    lexicon = ParseLexicon(ReadFileBytes(a.lexicon));
  } else if (a.op != "shuffle") {
    throw ConfigError("unknown augmentation '" + a.op + "'");
  }
  std::vector<PromptSample> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::uint64_t seed = a.seed + i;
    if (a.op == "shuffle") {
      out.push_back(AugmentShuffleApis(samples[i], seed));
    } else if (a.op == "inject") {
      // Gold apis of this sample are never injected.
      std::vector<ApiRecord> candidates;
      const auto gold = samples[i].gold.ApiIds();
      for (const auto& api : pool) {
        if (std::find(gold.begin(), gold.end(), api.id) == gold.end()) {
          candidates.push_back(api);
        }
      }
      out.push_back(AugmentInjectIrrelevant(samples[i], candidates, a.m, seed));
    } else {
      out.push_back(AugmentSynonyms(samples[i], lexicon, seed, a.rate));
    }
  }
  SavePromptSamples(out, a.out);
  std::cout << out.size() << " samples written to " << a.out << "\n";
  return 0;
}

int GenCorpus(const std::string& spec_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed) {
  SyntheticSpec spec;
  if (!spec_path.empty()) {
    const Json doc = Json::parse(ReadFileBytes(spec_path), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("spec is not valid JSON");
    spec = SyntheticSpec::FromJson(doc);
  }
  if (seed) spec.seed = *seed;
  spec.Validate();
  Announce("gen-corpus", spec.seed, Fnv1a64(spec.ToJson().dump()));
  const auto corpus = GenerateSyntheticCorpus(spec);
  const fs::path dir(out_dir);
  SaveApis(corpus.apis, dir / "apis.jsonl");
  SavePairs(corpus.training_pairs, dir / "pairs.jsonl");
  std::vector<TrainingPair> eval_pairs;
  for (const auto& q : corpus.eval_queries) {
    eval_pairs.push_back({q.instruction, q.gold_api_ids.front()});
  }
  SavePairs(eval_pairs, dir / "eval_pairs.jsonl");
  SaveTrajectories(corpus.trajectories, dir / "trajectories.jsonl");
  SaveDemos(corpus.demos, dir / "demos.jsonl");
  std::vector<PromptSample> samples;
  for (const auto& t : corpus.trajectories) {
    std::vector<std::string> ids;
    for (const auto& id : t.ApiIds()) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    samples.push_back({t.instruction, std::move(ids), t});
  }
  SavePromptSamples(samples, dir / "prompt_samples.jsonl");
  WriteFileBytes(dir / "spec.json", spec.ToJson().dump(2) + "\n");
  std::cout << corpus.apis.size() << " apis, " << corpus.training_pairs.size()
            << " pairs, " << corpus.eval_queries.size() << " eval queries, "
            << corpus.trajectories.size() << " trajectories, "
            << corpus.demos.size() << " demos -> " << out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------- ablation

struct AblateArgs {
  std::string config, suite, out_dir;
  std::vector<std::string> rows;
  int jobs = 1;
  bool stamp_times = false;
};

int Ablate(const AblateArgs& a) {
  RunConfig cfg = LoadConfig(a.config);
  if (!a.suite.empty()) cfg.paths.suite = a.suite;
  cfg.Validate();
  if (cfg.paths.suite.empty()) throw ConfigError("--suite is required");
  Announce("ablate", cfg.seed, cfg.Hash());
  const auto c = LoadComponents(cfg);
  const Pipeline pipeline(c.params, c.index, c.apis, c.demos, cfg.Pipeline());
  const auto golds = LoadTrajectories(cfg.paths.suite);
  CheckTrajectories(golds, c.apis);

  AblationConfig ac;
  if (!a.rows.empty()) {
    ac.rows.clear();
    for (const auto& r : a.rows) ac.rows.push_back(ParseAblationRow(r));
  }
  ac.pipeline = cfg.Pipeline();
  ac.mode = cfg.match_mode;
  ac.seed = cfg.seed;
  ac.jobs = a.jobs;
  ac.record_times = a.stamp_times;
  const auto result =
      RunAblation(pipeline, golds, MakeBackendFactory(cfg.backend), ac);

  const fs::path dir(a.out_dir);
  for (const auto& r : result.reports) {
    WriteFileBytes(dir / (r.config.value("row", r.run_id) + ".json"),
                   r.ToJson().dump(2) + "\n");
  }
  WriteFileBytes(dir / "ablation.csv", AblationCsv(result.reports));
  const std::string table = AblationTable(result.reports);
  WriteFileBytes(dir / "ablation.txt", table);
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolpilot: API retrieval, demo selection and tool-use agent runs"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-retriever",
                                       "Contrastively train the encoder");
  train_cmd->add_option("--config", train.config, "Run config (JSON)");
  train_cmd->add_option("--pairs", train.pairs, "Training pairs (JSON-lines)");
  train_cmd->add_option("--apis", train.apis, "API collection (JSON-lines)");
  train_cmd->add_option("--out-params", train.out_params, "Encoder output file");
  train_cmd->add_option("--loss-csv", train.loss_csv, "Per-epoch loss CSV");
  train_cmd->add_option("--epochs", train.epochs, "Override training.epochs");
  train_cmd->add_option("--batch-size", train.batch_size,
                        "Override training.batch_size");
  train_cmd->add_option("--lr", train.lr, "Override training.learning_rate");
  train_cmd->add_option("--seed", train.seed, "Override training.seed");

  EvalRetrieverArgs evr;
  auto* evr_cmd = app.add_subcommand("eval-retriever", "Print a Recall@k table");
  evr_cmd->add_option("--config", evr.config, "Run config (JSON)");
  evr_cmd->add_option("--params", evr.params, "Encoder parameters");
  evr_cmd->add_option("--apis", evr.apis, "API collection (JSON-lines)");
  evr_cmd->add_option("--index", evr.index, "Prebuilt index (optional)");
  evr_cmd->add_option("--eval", evr.eval,
                      "Eval queries: pair or trajectory JSON-lines");
  evr_cmd->add_option("--k", evr.ks, "Cutoffs")->expected(1, -1);

  std::string bi_params, bi_apis, bi_out;
  bool bi_include = false;
  auto* bi_cmd = app.add_subcommand("build-index", "Embed and persist the API index");
  bi_cmd->add_option("--params", bi_params, "Encoder parameters")->required();
  bi_cmd->add_option("--apis", bi_apis, "API collection (JSON-lines)")->required();
  bi_cmd->add_option("--out", bi_out, "Index output file")->required();
  bi_cmd->add_flag("--include-parameters", bi_include,
                   "Embed parameter names and descriptions too");

  AgentArgs agent;
  auto* run_cmd = app.add_subcommand("run-agent", "Run the agent pipeline");
  run_cmd->add_option("--config", agent.config, "Run config (JSON)")->required();
  auto* instr_opt = run_cmd->add_option("--instruction", agent.instruction,
                                        "Single instruction to solve");
  auto* suite_opt = run_cmd->add_option("--suite", agent.suite,
                                        "Gold trajectories (JSON-lines)");
  instr_opt->excludes(suite_opt);
  run_cmd->add_option("--trace-out", agent.trace_out, "Trace JSON output")->required();
  run_cmd->add_option("--report-out", agent.report_out, "Suite report JSON");
  run_cmd->add_option("--report-csv", agent.report_csv, "Suite metrics CSV");
  run_cmd->add_option("--row", agent.row,
                      "Suite variant: oracle_apis, oracle_apis_demos, "
                      "full_collection, random_k, retriever, retriever_demos");
  run_cmd->add_option("--jobs", agent.jobs, "Concurrent episodes");
  run_cmd->add_flag("--stamp-times", agent.stamp_times,
                    "Record wall-clock timestamps in the report");

  std::string ea_traces, ea_golds, ea_mode = "strict_sequence", ea_report;
  auto* ea_cmd = app.add_subcommand("eval-agent", "Score traces against golds");
  ea_cmd->add_option("--traces", ea_traces, "Trace suite JSON")->required();
  ea_cmd->add_option("--golds", ea_golds, "Gold trajectories")->required();
  ea_cmd->add_option("--mode", ea_mode, "strict_sequence or set_match");
  ea_cmd->add_option("--report-out", ea_report, "Report JSON");

  AugmentArgs aug;
  auto* aug_cmd = app.add_subcommand("augment", "Apply a prompt augmentation");
  aug_cmd->add_option("--op", aug.op, "shuffle, inject or synonym")->required();
  aug_cmd->add_option("--seed", aug.seed, "Base seed (sample i uses seed + i)");
  aug_cmd->add_option("--in", aug.in, "Prompt samples (JSON-lines)")->required();
  aug_cmd->add_option("--out", aug.out, "Output prompt samples")->required();
  aug_cmd->add_option("--pool", aug.pool, "Irrelevant API pool (inject)");
  aug_cmd->add_option("--m", aug.m, "APIs to inject per sample");
  aug_cmd->add_option("--lexicon", aug.lexicon, "Synonym lexicon JSON");
  aug_cmd->add_option("--rate", aug.rate, "Substitution probability");

  std::string gc_spec, gc_out;
  std::optional<std::uint64_t> gc_seed;
  auto* gc_cmd = app.add_subcommand("gen-corpus", "Generate a synthetic corpus");
  gc_cmd->add_option("--spec", gc_spec, "Synthetic spec JSON (defaults if absent)");
  gc_cmd->add_option("--out-dir", gc_out, "Output directory")->required();
  gc_cmd->add_option("--seed", gc_seed, "Override the spec seed");

  AblateArgs ablate;
  auto* ab_cmd = app.add_subcommand("ablate", "Run the ablation rows");
  ab_cmd->add_option("--config", ablate.config, "Run config (JSON)")->required();
  ab_cmd->add_option("--suite", ablate.suite, "Gold trajectories");
  ab_cmd->add_option("--out-dir", ablate.out_dir, "Report directory")->required();
  ab_cmd->add_option("--rows", ablate.rows, "Subset of rows");
  ab_cmd->add_option("--jobs", ablate.jobs, "Concurrent episodes");
  ab_cmd->add_flag("--stamp-times", ablate.stamp_times,
                   "Record wall-clock timestamps in reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::kConfig);
  }

  try {
    if (*train_cmd) return TrainRetriever(train);
    if (*evr_cmd) return EvalRetriever(evr);
    if (*bi_cmd) return BuildIndexCommand(bi_params, bi_apis, bi_out, bi_include);
    if (*run_cmd) return RunAgent(agent);
    if (*ea_cmd) return EvalAgent(ea_traces, ea_golds, ea_mode, ea_report);
    if (*aug_cmd) return Augment(aug);
    if (*gc_cmd) return GenCorpus(gc_spec, gc_out, gc_seed);
    if (*ab_cmd) return Ablate(ablate);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kRuntime);
  }
  return static_cast<int>(ErrorKind::kConfig);
}
