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


#include "experiments.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "runner.h"
#include "tprnn/bptt.h"
#include "tprnn/errors.h"
#include "tprnn/grid.h"

namespace tprnn::cli {
namespace {

std::string Num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string PathIn(const std::string& dir, const std::string& file) {
  return dir.empty() ? std::string() : (std::filesystem::path(dir) / file).string();
}

}  // namespace

std::vector<PlannedRun> PlanHiddenSweep(const RunConfig& base,
                                        const std::vector<std::size_t>& hidden_sizes) {
  if (hidden_sizes.empty()) throw ArgumentError("sweep needs at least one hidden size");
  std::vector<PlannedRun> runs;
  for (std::size_t h : hidden_sizes) {
    const std::string prefix = "h" + std::to_string(h);
    RunConfig bptt = base;
    bptt.method = Method::kBptt;
    bptt.hidden = h;
    runs.push_back({prefix + "-bptt-K" + std::to_string(base.window), bptt});
    for (std::size_t steps : {2, 5}) {
      RunConfig bt = base;
      bt.method = Method::kBtprop;
      bt.hidden = h;
      bt.h_steps = steps;
      runs.push_back({prefix + "-btprop-B" + std::to_string(base.block) + "-H" +
                          std::to_string(steps),
                      bt});
    }
  }
  return runs;
}

std::vector<PlannedRun> PlanGridSweep(const RunConfig& base) {
  std::vector<PlannedRun> runs;
  const std::vector<GridPoint> grid = EnumerateGrid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridPoint& p = grid[i];
    RunConfig c = base;
    c.method = Method::kBtprop;
    c.lambda = p.lambda;
    c.alpha_u = p.alpha_u;
    c.lr_h = p.lr_h;
    c.lr = p.lr_theta;
    c.theta_steps = p.theta_steps;
    c.h_steps = p.h_steps;
    char name[128];
    std::snprintf(name, sizeof(name), "g%03zu-lam%g-au%g-lrh%g-lr%g-T%zu-H%zu", i, p.lambda,
                  p.alpha_u, p.lr_h, p.lr_theta, p.theta_steps, p.h_steps);
    runs.push_back({name, c});
  }
  return runs;
}

std::vector<RunOutcome> RunSweep(const std::vector<PlannedRun>& runs, const std::string& out_dir,
                                 std::size_t jobs) {
  std::filesystem::create_directories(out_dir);
  std::vector<RunOutcome> outcomes(runs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;

  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      RunConfig c = runs[i].config;
      c.metrics = PathIn(out_dir, runs[i].name + ".metrics.jsonl");
      c.manifest.clear();
      c.checkpoint.clear();
      RunOutcome& o = outcomes[i];
      o.name = runs[i].name;
      try {
        const RunResult r = ExecuteRun(c);
        o.ok = true;
        o.final_ppl = r.final_ppl;
        o.best_ppl = r.best_ppl;
      } catch (const std::exception& e) {
        o.error = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mu);
      std::fprintf(stderr, "[%zu/%zu] %s seed=%llu %s\n", i + 1, runs.size(), o.name.c_str(),
                   static_cast<unsigned long long>(c.seed),
                   o.ok ? ("ppl " + Num(o.final_ppl)).c_str() : ("FAILED: " + o.error).c_str());
    }
  };

  const std::size_t n = std::max<std::size_t>(1, std::min(jobs, runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::ofstream csv(PathIn(out_dir, "summary.csv"), std::ios::binary | std::ios::trunc);
  if (!csv) throw FormatError("cannot write summary.csv in " + out_dir);
  csv << SummaryCsv(runs, outcomes);
  return outcomes;
}

std::string SummaryCsv(const std::vector<PlannedRun>& runs,
                       const std::vector<RunOutcome>& outcomes) {
  std::ostringstream out;
  out << "name,method,cell,hidden,seed,epochs,window,block,schedule,lambda,alpha_u,lr_h,lr,"
         "theta_steps,h_steps,status,final_ppl,best_ppl\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunConfig& c = runs[i].config;
    const RunOutcome& o = outcomes[i];
    const bool bt = c.method == Method::kBtprop;
    out << runs[i].name << ',' << MethodName(c.method) << ',' << CellKindName(c.cell) << ','
        << c.hidden << ',' << c.seed << ',' << c.epochs << ',';
    out << (bt ? "" : std::to_string(c.window)) << ',';
    out << (bt ? std::to_string(c.block) : "") << ',';
    out << (bt ? std::string(ScheduleName(c.schedule)) : "") << ',';
    out << (bt ? Num(c.lambda) : "") << ',' << (bt ? Num(c.alpha_u) : "") << ','
        << (bt ? Num(c.lr_h) : "") << ',' << Num(c.lr) << ','
        << (bt ? std::to_string(c.theta_steps) : "") << ','
        << (bt ? std::to_string(c.h_steps) : "") << ',';
    out << (o.ok ? "ok" : "failed") << ',';
    out << (o.ok ? Num(o.final_ppl) : "") << ',' << (o.ok ? Num(o.best_ppl) : "") << '\n';
  }
  return out.str();
}

AblationReport RunAblation(const RunConfig& base, const std::string& out_dir,
                           std::size_t oracle_every) {
  if (base.regime != Regime::kMinibatch) {
    throw ConfigError("ablate requires the minibatch regime");
  }
  if (oracle_every == 0) throw ConfigError("oracle interval must be >= 1");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  struct Condition {
    std::string name;
    std::size_t h_steps;
    double lambda;
    bool oracle;
  };
  const Condition conditions[] = {
      {"h-steps=1", 1, base.lambda, false},
      {"h-steps=0", 0, base.lambda, false},
      {"h-steps=0,lambda=0", 0, 0.0, true},
  };

  AblationReport report;
  for (const Condition& cond : conditions) {
    RunConfig c = base;
    c.method = Method::kBtprop;
    c.h_steps = cond.h_steps;
    c.lambda = cond.lambda;
    c.metrics = PathIn(out_dir, cond.name + ".metrics.jsonl");
    c.manifest.clear();
    c.checkpoint.clear();

    AblationRow row;
    row.condition = cond.name;
    row.h_steps = cond.h_steps;
    row.lambda = cond.lambda;
    RunHooks hooks;
    if (cond.oracle) {
      row.oracle_max_diff = 0.0;
      hooks.on_theta_gradient = [&](std::size_t segment, const ParamSet& theta,
                                    const TPropProblem& problem, const GradSet& grad) {
        if (segment % oracle_every != 0) return;
        GradSet reference = theta.ZeroGradSet();
        TruncatedGradient(theta, problem.tokens, c.block, problem.h_start, reference);
        const double diff = grad.MaxAbsDiff(reference);
        ++row.oracle_checks;
        row.oracle_max_diff = std::max(*row.oracle_max_diff, diff);
        if (!(diff <= kOracleTolerance)) report.oracle_ok = false;
      };
    }
    row.final_ppl = ExecuteRun(c, hooks).final_ppl;
    report.rows.push_back(row);
  }
  for (AblationRow& row : report.rows) {
    row.delta_ppl = row.final_ppl - report.rows.front().final_ppl;
  }
  if (!out_dir.empty()) {
    std::ofstream csv(PathIn(out_dir, "ablation.csv"), std::ios::binary | std::ios::trunc);
    csv << AblationCsv(report);
  }
  return report;
}

std::string AblationCsv(const AblationReport& report) {
  std::ostringstream out;
  out << "condition,h_steps,lambda,final_ppl,delta_ppl,oracle_checks,oracle_max_diff\n";
  for (const AblationRow& r : report.rows) {
    out << '"' << r.condition << "\"," << r.h_steps << ',' << Num(r.lambda) << ','
        << Num(r.final_ppl) << ',' << Num(r.delta_ppl) << ',' << r.oracle_checks << ','
        << (r.oracle_max_diff ? Num(*r.oracle_max_diff) : "") << '\n';
  }
  return out.str();
}

}  // namespace tprnn::cli
