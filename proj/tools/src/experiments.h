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


// Multi-run experiments: hidden-size and grid sweeps, and the free-state
// ablation.

#ifndef TPRNN_TOOLS_EXPERIMENTS_H_
#define TPRNN_TOOLS_EXPERIMENTS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "run_config.h"

namespace tprnn::cli {

struct PlannedRun {
  std::string name;
  RunConfig config;
};

// For every hidden size: BPTT with the base window, and BTPROP with the base
// block at 2 and 5 free-state steps. Throws ArgumentError on an empty list.
std::vector<PlannedRun> PlanHiddenSweep(const RunConfig& base,
                                        const std::vector<std::size_t>& hidden_sizes);

// One BTPROP run per point of the hyperparameter grid.
std::vector<PlannedRun> PlanGridSweep(const RunConfig& base);

struct RunOutcome {
  std::string name;
  bool ok = false;
  std::string error;
  double final_ppl = 0.0;
  double best_ppl = 0.0;
};

// Runs every plan with up to jobs at a time. Each run writes
// <out_dir>/<name>.metrics.jsonl (plus manifest and timing); failures are
// recorded and the sweep continues. Writes <out_dir>/summary.csv.
std::vector<RunOutcome> RunSweep(const std::vector<PlannedRun>& runs, const std::string& out_dir,
                                 std::size_t jobs);

std::string SummaryCsv(const std::vector<PlannedRun>& runs,
                       const std::vector<RunOutcome>& outcomes);

struct AblationRow {
  std::string condition;
  std::size_t h_steps = 0;
  double lambda = 0.0;
  double final_ppl = 0.0;
  double delta_ppl = 0.0;  // final_ppl - baseline final_ppl
  std::size_t oracle_checks = 0;
  std::optional<double> oracle_max_diff;
};

struct AblationReport {
  std::vector<AblationRow> rows;
  bool oracle_ok = true;
};

inline constexpr double kOracleTolerance = 1e-10;

// Baseline (1 free-state step), no free-state steps, and no free-state steps
// with lambda = 0, all from the same seed. In the last condition every
// oracle_every-th segment's theta-gradient is compared with truncated BPTT
// over the segment. Requires the minibatch regime. Metrics go to out_dir if
// it is non-empty.
AblationReport RunAblation(const RunConfig& base, const std::string& out_dir,
                           std::size_t oracle_every = 50);

std::string AblationCsv(const AblationReport& report);

}  // namespace tprnn::cli

#endif  // TPRNN_TOOLS_EXPERIMENTS_H_
