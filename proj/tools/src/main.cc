// Copyright 2026 The tprnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// tprnn: train and evaluate recurrent language models with truncated BPTT or
// blocked target propagation, and run the gradient verification suite.
//
// Exit codes: 0 success, 1 failure, 2 configuration error.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "experiments.h"
#include "run_config.h"
#include "runner.h"
#include "tprnn/checkpoint.h"
#include "tprnn/errors.h"
#include "tprnn/eval.h"
#include "tprnn/grid.h"
#include "tprnn/verify.h"

namespace tprnn::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

// Flag values for the config keys of one subcommand.
struct KeyFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::string config_file;
  CLI::App* app = nullptr;

  std::map<std::string, std::string> Given() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : values) {
      if (app->count("--" + k) > 0) out[k] = v;
    }
    for (const auto& [k, on] : switches) {
      if (app->count("--" + k) > 0) out[k] = on ? "true" : "false";
    }
    return out;
  }

  RunConfig Resolve(Method method) const {
    std::optional<std::string> file;
    if (!config_file.empty()) {
      file = config_file;
    } else if (auto env = ProcessEnv("TPRNN_CONFIG")) {
      file = *env;
    }
    return cli::Resolve(method, file, Given());
  }
};

void AddKeyFlags(CLI::App* app, KeyFlags& flags, std::optional<Method> method) {
  flags.app = app;
  app->add_option("--config", flags.config_file, "key=value config file (env TPRNN_CONFIG)");
  for (const ConfigKey& key : ConfigKeys()) {
    if (method && !KeyApplies(key, *method)) continue;
    const std::string help = key.help + " [env " + EnvName(key.name) + "]";
    if (key.name == "h-reinit") {
      app->add_flag("--" + key.name, flags.switches[key.name], help);
    } else {
      app->add_option("--" + key.name, flags.values[key.name], help);
    }
  }
}

void Print(const Json& j) { std::cout << j.dump(2) << std::endl; }

int TrainCommand(Method method, const KeyFlags& flags) {
  const RunConfig config = flags.Resolve(method);
  RunHooks hooks;
  hooks.progress = &std::cerr;
  const RunResult result = ExecuteRun(config, hooks);
  Print(ResultJson(config, result));
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, corpus, vocab;
  double valid_frac = 0.0;
};

int EvalCommand(const EvalArgs& args) {
  const ParamSet theta = LoadCheckpoint(args.checkpoint);
  const Vocab vocab = LoadVocab(args.vocab.empty() ? VocabPathFor(args.checkpoint) : args.vocab);
  if (vocab.size() != theta.dims().vocab) {
    throw ConfigError("vocabulary size does not match the checkpoint");
  }
  TokenStream stream = vocab.Encode(ReadTextFile(args.corpus), StreamRole::kValid);
  if (args.valid_frac > 0.0) stream = SplitTrainValid(stream, args.valid_frac).second;
  const EvalResult r = Evaluate(theta, stream.span());
  Json j;
  j["tokens"] = r.tokens;
  j["mean_nll"] = r.mean_nll;
  j["perplexity"] = r.perplexity;
  Print(j);
  return kExitOk;
}

struct EquivalenceArgs {
  std::string cell = "all";
  double eta = 0.1;
  double lambda = 0.1;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  bool grid = false;
  bool negative_control = false;
  std::size_t vocab = 7, input = 5, hidden = 5;
};

int EquivalenceCommand(const EquivalenceArgs& a) {
  std::vector<CellKind> cells;
  if (a.cell == "all") {
    cells = {CellKind::kElman, CellKind::kGru};
  } else {
    try {
      cells = {ParseCellKind(a.cell)};
    } catch (const ArgumentError& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<std::pair<double, double>> points;
  if (a.grid) {
    for (double eta : kGridLrH)
      for (double lambda : kGridLambda) points.emplace_back(eta, lambda);
  } else {
    points.emplace_back(a.eta, a.lambda);
  }
  if (a.seeds == 0) throw ConfigError("--seeds must be >= 1");

  Json reports = Json::array();
  bool passed = true;
  double worst = 0.0;
  for (CellKind cell : cells) {
    for (const auto& [eta, lambda] : points) {
      for (std::size_t s = 0; s < a.seeds; ++s) {
        const EquivalenceReport r = CheckEquivalence(cell, {a.vocab, a.input, a.hidden}, eta,
                                                     lambda, a.seed + s, a.negative_control);
        passed = passed && r.passed;
        worst = std::max(worst, r.max_deviation);
        Json j;
        j["cell"] = std::string(CellKindName(cell));
        j["eta"] = eta;
        j["lambda"] = lambda;
        j["seed"] = r.seed;
        j["max_deviation"] = r.max_deviation;
        j["ratio"] = r.ratio;
        j["expected_ratio"] = r.expected_ratio;
        Json tensors = Json::object();
        for (const TensorDeviation& t : r.tensors) tensors[t.name] = t.deviation;
        j["tensors"] = tensors;
        j["passed"] = r.passed;
        reports.push_back(std::move(j));
      }
    }
  }
  Json out;
  out["check"] = "equivalence";
  out["negative_control"] = a.negative_control;
  out["tolerance"] = kEquivalenceTolerance;
  out["checks"] = reports.size();
  out["max_deviation"] = worst;
  out["passed"] = passed;
  out["reports"] = std::move(reports);
  Print(out);
  return passed ? kExitOk : kExitFailure;
}

int GradsCommand(std::uint64_t seed, std::size_t seeds) {
  if (seeds == 0) throw ConfigError("--seeds must be >= 1");
  Json runs = Json::array();
  std::map<std::string, double> worst;
  bool passed = true;
  for (std::size_t s = 0; s < seeds; ++s) {
    const GradcheckReport r = GradcheckAll(seed + s);
    passed = passed && r.passed;
    Json paths = Json::array();
    for (const PathReport& p : r.paths) {
      worst[p.name] = std::max(worst[p.name], p.max_rel_error);
      paths.push_back({{"path", p.name},
                       {"checked", p.checked},
                       {"max_rel_error", p.max_rel_error},
                       {"tolerance", p.tolerance},
                       {"passed", p.passed}});
    }
    runs.push_back({{"seed", r.seed}, {"passed", r.passed}, {"paths", std::move(paths)}});
  }
  Json out;
  out["check"] = "gradients";
  out["epsilon"] = kGradcheckEpsilon;
  out["seeds"] = seeds;
  Json w = Json::object();
  for (const auto& [k, v] : worst) w[k] = v;
  out["worst_rel_error"] = std::move(w);
  out["passed"] = passed;
  out["runs"] = std::move(runs);
  Print(out);
  return passed ? kExitOk : kExitFailure;
}

struct SweepArgs {
  std::vector<std::size_t> hidden_sizes;
  bool grid = false;
  bool dry_run = false;
  std::string out;
  std::size_t jobs = 1;
};

int SweepCommand(const SweepArgs& a, const KeyFlags& flags, bool hidden_given) {
  const RunConfig base = flags.Resolve(Method::kBtprop);
  if (a.grid == hidden_given) {
    throw ConfigError("sweep needs exactly one of --hidden-sizes or --grid");
  }
  std::vector<PlannedRun> runs;
  try {
    runs = a.grid ? PlanGridSweep(base) : PlanHiddenSweep(base, a.hidden_sizes);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (a.dry_run) {
    for (const PlannedRun& r : runs) std::cout << r.name << '\n';
    std::cout << runs.size() << " runs" << std::endl;
    return kExitOk;
  }
  if (a.out.empty()) throw ConfigError("sweep needs --out");
  base.Validate();
  const std::vector<RunOutcome> outcomes = RunSweep(runs, a.out, a.jobs);
  std::cout << SummaryCsv(runs, outcomes);
  for (const RunOutcome& o : outcomes) {
    if (!o.ok) return kExitFailure;
  }
  return kExitOk;
}

int AblateCommand(const KeyFlags& flags, const std::string& out, std::size_t every) {
  const RunConfig base = flags.Resolve(Method::kBtprop);
  const AblationReport report = RunAblation(base, out, every);
  std::cout << AblationCsv(report);
  return report.oracle_ok ? kExitOk : kExitFailure;
}

int BuildVocabCommand(const std::string& corpus, const std::string& tokens,
                      std::size_t max_vocab, const std::string& out) {
  TokenMode mode;
  try {
    mode = ParseTokenMode(tokens);
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  const std::string text = ReadTextFile(corpus);
  const Vocab vocab = Vocab::Build(
      text, mode, max_vocab == 0 ? std::nullopt : std::optional<std::size_t>(max_vocab));
  SaveVocab(vocab, out);
  Json j;
  j["vocab"] = out;
  j["tokens"] = tokens;
  j["size"] = vocab.size();
  j["corpus_checksum"] = ChecksumHex(text);
  Print(j);
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"tprnn: recurrent language models with truncated BPTT or blocked target "
               "propagation"};
  app.set_version_flag("--version", Version());
  app.require_subcommand(1);

  KeyFlags bptt_flags, btprop_flags, sweep_flags, ablate_flags;
  auto* train_bptt = app.add_subcommand("train-bptt", "train with truncated BPTT");
  AddKeyFlags(train_bptt, bptt_flags, Method::kBptt);
  auto* train_btprop = app.add_subcommand("train-btprop", "train with blocked target propagation");
  AddKeyFlags(train_btprop, btprop_flags, Method::kBtprop);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "perplexity of a checkpoint on a corpus");
  eval->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
  eval->add_option("--corpus", eval_args.corpus, "text corpus")->required();
  eval->add_option("--vocab", eval_args.vocab, "vocab file (default <checkpoint>.vocab)");
  eval->add_option("--valid-frac", eval_args.valid_frac,
                   "score only the final fraction of the corpus")
      ->check(CLI::Range(0.0, 1.0));

  EquivalenceArgs eq;
  auto* veq = app.add_subcommand("verify-equivalence",
                                 "check the one-step BPTT/target-propagation gradient identity");
  veq->add_option("--cell", eq.cell, "elman|gru|all");
  veq->add_option("--eta", eq.eta, "free-state step size");
  veq->add_option("--lambda", eq.lambda, "penalty weight");
  veq->add_option("--seed", eq.seed, "first seed");
  veq->add_option("--seeds", eq.seeds, "number of consecutive seeds");
  veq->add_flag("--grid", eq.grid, "all (eta, lambda) pairs of the hyperparameter grid");
  veq->add_flag("--negative-control", eq.negative_control,
                "displace h_t from the recurrence (the identity should fail)");
  veq->add_option("--vocab-size", eq.vocab, "vocabulary size");
  veq->add_option("--input", eq.input, "embedding size");
  veq->add_option("--hidden", eq.hidden, "hidden size");

  std::uint64_t grads_seed = 0;
  std::size_t grads_seeds = 1;
  auto* vgr = app.add_subcommand("verify-grads", "finite-difference audit of every gradient path");
  vgr->add_option("--seed", grads_seed, "first seed");
  vgr->add_option("--seeds", grads_seeds, "number of consecutive seeds");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "hidden-size sweep or hyperparameter grid");
  AddKeyFlags(sweep, sweep_flags, std::nullopt);
  auto* hidden_opt = sweep->add_option("--hidden-sizes", sweep_args.hidden_sizes,
                                       "comma-separated hidden sizes")
                         ->delimiter(',')
                         ->expected(0, -1);
  sweep->add_flag("--grid", sweep_args.grid, "every point of the hyperparameter grid");
  sweep->add_flag("--dry-run", sweep_args.dry_run, "list the runs without executing them");
  sweep->add_option("--out", sweep_args.out, "output directory");
  sweep->add_option("--jobs", sweep_args.jobs, "runs executed concurrently")
      ->check(CLI::PositiveNumber);

  std::string ablate_out;
  std::size_t oracle_every = 50;
  auto* ablate = app.add_subcommand("ablate", "free-state step and penalty ablation");
  AddKeyFlags(ablate, ablate_flags, Method::kBtprop);
  ablate->add_option("--out", ablate_out, "output directory for metrics");
  ablate->add_option("--oracle-every", oracle_every,
                     "compare against truncated BPTT every N segments");

  std::string vocab_corpus, vocab_tokens = "char", vocab_out;
  std::size_t vocab_max = 0;
  auto* bv = app.add_subcommand("build-vocab", "build a vocabulary file");
  bv->add_option("--corpus", vocab_corpus, "text corpus")->required();
  bv->add_option("--tokens", vocab_tokens, "char|word");
  bv->add_option("--max-vocab", vocab_max, "keep the most frequent tokens (0 = all)");
  bv->add_option("--out", vocab_out, "output file")->required();

  std::string replay_manifest, replay_metrics;
  auto* replay = app.add_subcommand("replay", "re-run a training run from its manifest");
  replay->add_option("--manifest", replay_manifest, "run manifest")->required();
  replay->add_option("--metrics", replay_metrics,
                     "metrics output (default <manifest>.replay.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train_bptt) return TrainCommand(Method::kBptt, bptt_flags);
    if (*train_btprop) return TrainCommand(Method::kBtprop, btprop_flags);
    if (*eval) return EvalCommand(eval_args);
    if (*veq) return EquivalenceCommand(eq);
    if (*vgr) return GradsCommand(grads_seed, grads_seeds);
    if (*sweep) return SweepCommand(sweep_args, sweep_flags, hidden_opt->count() > 0);
    if (*ablate) return AblateCommand(ablate_flags, ablate_out, oracle_every);
    if (*bv) return BuildVocabCommand(vocab_corpus, vocab_tokens, vocab_max, vocab_out);
    if (*replay) {
      const std::string metrics =
          replay_metrics.empty() ? replay_manifest + ".replay.jsonl" : replay_metrics;
      RunHooks hooks;
      hooks.progress = &std::cerr;
      const RunResult r = Replay(replay_manifest, metrics, hooks);
      Json j;
      j["metrics"] = metrics;
      j["final_valid_ppl"] = r.final_ppl;
      Print(j);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << std::endl;
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace
}  // namespace tprnn::cli

int main(int argc, char** argv) { return tprnn::cli::Main(argc, argv); }
