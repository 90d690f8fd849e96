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

#include "tprnn/btprop.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "tprnn/errors.h"
#include "tprnn/eval.h"

namespace tprnn {
namespace {

BlockResult RunBlock(Unroll& unroll, const ParamSet& theta,
                     std::span<const TokenId> tokens, const Tensor& h_in,
                     const Tensor& h_next, const Tensor& u, double lambda,
                     GradSet* dtheta, BlockTerms terms) {
  const std::size_t d = theta.dims().hidden;
  BlockResult r;
  const double pred = unroll.Forward(theta, tokens, h_in.span());
  r.prediction_loss = terms.prediction ? pred : 0.0;
  r.h_boundary = unroll.final_state();
  if (terms.penalty) {
    PenaltyResult p = BoundaryPenalty(h_next, r.h_boundary, u, lambda);
    r.penalty = p.value;
    r.dh_next = std::move(p.d_next);
    r.dh_boundary = std::move(p.d_hat);
  } else {
    r.dh_next = Tensor(d);
    r.dh_boundary = Tensor(d);
  }
  r.dh_in = Tensor(d);
  unroll.Backward(theta, r.dh_boundary.span(), dtheta, r.dh_in.span(),
                  terms.prediction);
  return r;
}

const Tensor& BlockInput(const TPropProblem& problem, std::size_t b) {
  return b == 0 ? problem.h_start : problem.hidden.values[b - 1];
}

void CheckProblem(const TPropProblem& problem) {
  const std::size_t nb = problem.plan.num_blocks();
  if (problem.hidden.values.size() != nb || problem.duals.values.size() != nb) {
    throw StateError("TPropProblem: stores do not match the block plan");
  }
}

double Norm(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::string_view ScheduleName(Schedule schedule) {
  switch (schedule) {
    case Schedule::kPm:
      return "pm";
    case Schedule::kAlm:
      return "alm";
    case Schedule::kAdmm:
      return "admm";
  }
  return "?";
}

Schedule ParseSchedule(std::string_view name) {
  if (name == "pm") return Schedule::kPm;
  if (name == "alm") return Schedule::kAlm;
  if (name == "admm") return Schedule::kAdmm;
  throw ArgumentError("unknown schedule '" + std::string(name) +
                      "' (expected pm|alm|admm)");
}

BlockPlan::BlockPlan(std::size_t stream_tokens, std::size_t block_size)
    : block_size_(block_size) {
  if (block_size == 0) throw ConfigError("block size B must be >= 1");
  if (stream_tokens < 2) return;
  const std::size_t steps = stream_tokens - 1;
  for (std::size_t s = 0, b = 0; s < steps; s += block_size, ++b) {
    blocks_.push_back({b, s, std::min(block_size, steps - s)});
  }
}

std::optional<std::size_t> BlockPlan::initial_free_variable(std::size_t b) const {
  if (b == 0) return std::nullopt;
  return b - 1;
}

std::span<const TokenId> BlockPlan::BlockTokens(std::span<const TokenId> span,
                                                std::size_t b) const {
  const Block& blk = blocks_.at(b);
  return span.subspan(blk.start, blk.steps + 1);
}

PenaltyResult BoundaryPenalty(const Tensor& h_next, const Tensor& h_hat,
                              const Tensor& u, double lambda) {
  CheckSameShape(h_next, h_hat, "BoundaryPenalty");
  CheckSameShape(h_next, u, "BoundaryPenalty");
  PenaltyResult p;
  p.d_next = Tensor(h_next.size());
  p.d_hat = Tensor(h_next.size());
  p.d_u = Tensor(h_next.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < h_next.size(); ++i) {
    const double r = h_next[i] - h_hat[i] + u[i];
    sq += r * r;
    p.d_next[i] = lambda * r;
    p.d_hat[i] = -lambda * r;
    p.d_u[i] = lambda * r;
  }
  p.value = 0.5 * lambda * sq;
  return p;
}

BlockResult BlockForwardBackward(const ParamSet& theta, std::span<const TokenId> tokens,
                                 const Tensor& h_in, const Tensor& h_next,
                                 const Tensor& u, double lambda, GradSet* dtheta,
                                 BlockTerms terms) {
  Unroll unroll;
  return RunBlock(unroll, theta, tokens, h_in, h_next, u, lambda, dtheta, terms);
}

double BlockForward(const ParamSet& theta, std::span<const TokenId> tokens,
                    const Tensor& h_in, const Tensor& h_next, const Tensor& u,
                    double lambda, Tensor* h_boundary, BlockTerms terms) {
  Tensor h_hat;
  const double pred = ForwardLoss(theta, tokens, h_in.span(), &h_hat);
  double loss = terms.prediction ? pred : 0.0;
  if (terms.penalty) {
    CheckSameShape(h_next, h_hat, "BlockForward");
    CheckSameShape(u, h_hat, "BlockForward");
    double sq = 0.0;
    for (std::size_t i = 0; i < h_hat.size(); ++i) {
      const double r = h_next[i] - h_hat[i] + u[i];
      sq += r * r;
    }
    loss += 0.5 * lambda * sq;
  }
  if (h_boundary != nullptr) *h_boundary = std::move(h_hat);
  return loss;
}

TPropProblem TPropProblem::Create(std::span<const TokenId> tokens,
                                  std::size_t block_size, std::size_t hidden_size,
                                  double lambda) {
  TPropProblem p;
  p.tokens = tokens;
  p.plan = BlockPlan(tokens.size(), block_size);
  p.h_start = Tensor(hidden_size);
  p.lambda = lambda;
  const std::size_t nb = p.plan.num_blocks();
  p.hidden.values.assign(nb, Tensor(hidden_size));
  p.hidden.grads.assign(nb, Tensor(hidden_size));
  p.duals.values.assign(nb, Tensor(hidden_size));
  return p;
}

double TPropProblem::InitializeFromForward(const ParamSet& theta) {
  CheckProblem(*this);
  double loss = 0.0;
  for (std::size_t b = 0; b < plan.num_blocks(); ++b) {
    const Tensor& h_in = b == 0 ? h_start : hidden.values[b - 1];
    loss += ForwardLoss(theta, plan.BlockTokens(tokens, b), h_in.span(),
                        &hidden.values[b]);
    hidden.grads[b].SetZero();
    duals.values[b].SetZero();
  }
  return loss;
}

BlockEngine::BlockEngine(std::size_t threads) : pool_(std::max<std::size_t>(threads, 1)) {}

AugmentedValue BlockEngine::Evaluate(const ParamSet& theta, const TPropProblem& problem,
                                     std::vector<Tensor>* h_hat) {
  CheckProblem(problem);
  const std::size_t nb = problem.plan.num_blocks();
  std::vector<double> pred(nb), pen(nb);
  std::vector<Tensor> hats(nb);
  pool_.ParallelFor(nb, [&](std::size_t b) {
    const Tensor& u = problem.duals.values[b];
    const Tensor& h_next = problem.hidden.values[b];
    Tensor hat;
    pred[b] = ForwardLoss(theta, problem.plan.BlockTokens(problem.tokens, b),
                          BlockInput(problem, b).span(), &hat);
    double sq = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i) {
      const double r = h_next[i] - hat[i] + u[i];
      sq += r * r;
    }
    pen[b] = 0.5 * problem.lambda * sq;
    hats[b] = std::move(hat);
  });
  AugmentedValue v;
  for (std::size_t b = 0; b < nb; ++b) {
    v.prediction += pred[b];
    v.penalty += pen[b];
  }
  if (h_hat != nullptr) *h_hat = std::move(hats);
  return v;
}

AugmentedValue BlockEngine::Gradients(const ParamSet& theta, const TPropProblem& problem,
                                      GradSet* dtheta, std::vector<Tensor>* dh,
                                      std::vector<Tensor>* h_hat) {
  CheckProblem(problem);
  const std::size_t nb = problem.plan.num_blocks();
  if (nb == 0) return {};
  const std::size_t chunk = (nb + kMaxChunks - 1) / kMaxChunks;
  const std::size_t n_chunks = (nb + chunk - 1) / chunk;
  if (dtheta != nullptr) {
    while (chunk_grads_.size() < n_chunks) chunk_grads_.push_back(theta.ZeroGradSet());
  }

  std::vector<BlockResult> results(nb);
  pool_.ParallelFor(n_chunks, [&](std::size_t c) {
    GradSet* partial = nullptr;
    if (dtheta != nullptr) {
      partial = &chunk_grads_[c];
      if (partial->size() != theta.num_tensors()) *partial = theta.ZeroGradSet();
      partial->SetZero();
    }
    Unroll unroll;
    const std::size_t end = std::min(nb, (c + 1) * chunk);
    for (std::size_t b = c * chunk; b < end; ++b) {
      results[b] = RunBlock(unroll, theta, problem.plan.BlockTokens(problem.tokens, b),
                            BlockInput(problem, b), problem.hidden.values[b],
                            problem.duals.values[b], problem.lambda, partial,
                            BlockTerms{});
    }
  });

  if (dtheta != nullptr) {
    for (std::size_t c = 0; c < n_chunks; ++c) dtheta->Add(chunk_grads_[c]);
  }
  AugmentedValue v;
  for (std::size_t b = 0; b < nb; ++b) {
    v.prediction += results[b].prediction_loss;
    v.penalty += results[b].penalty;
  }
  if (dh != nullptr) {
    dh->resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      Tensor g = std::move(results[b].dh_next);
      if (b + 1 < nb) AddScaled(g, results[b + 1].dh_in);
      (*dh)[b] = std::move(g);
    }
  }
  if (h_hat != nullptr) {
    h_hat->resize(nb);
    for (std::size_t b = 0; b < nb; ++b) (*h_hat)[b] = std::move(results[b].h_boundary);
  }
  return v;
}

void TPropConfig::Validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(alpha_u >= 0.0)) throw ConfigError("alpha_u must be >= 0");
  if (!(lr_h >= 0.0) || !(lr_theta >= 0.0)) {
    throw ConfigError("learning rates must be >= 0");
  }
  if (block_size == 0) throw ConfigError("block size B must be >= 1");
  if (minibatch_blocks == 0) throw ConfigError("minibatch_blocks must be >= 1");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
}

HStepReport HStep(const ParamSet& theta, TPropProblem& problem, const TPropConfig& config,
                  Optimizer& h_optimizer, BlockEngine& engine) {
  HStepReport report;
  for (std::size_t round = 0; round < config.h_steps; ++round) {
    const AugmentedValue before =
        engine.Gradients(theta, problem, nullptr, &problem.hidden.grads);
    if (round == 0) report.first = before;
    const std::vector<Tensor> saved = problem.hidden.values;
    const Optimizer snapshot = h_optimizer;
    h_optimizer.Step(problem.hidden.values, problem.hidden.grads);
    AugmentedValue after = engine.Evaluate(theta, problem);
    if (after.total() > before.total()) {
      problem.hidden.values = saved;
      h_optimizer = snapshot;
      h_optimizer.Step(problem.hidden.values, problem.hidden.grads,
                       0.5 * h_optimizer.lr());
      ++report.backtracks;
      after = engine.Evaluate(theta, problem);
    }
    report.last = after;
  }
  return report;
}

AugmentedValue ThetaStep(ParamSet& theta, const TPropProblem& problem,
                         const TPropConfig& config, Optimizer& theta_optimizer,
                         BlockEngine& engine, const ThetaGradientHook& hook) {
  AugmentedValue first;
  for (std::size_t s = 0; s < config.theta_steps; ++s) {
    theta.ZeroGrad();
    const AugmentedValue v = engine.Gradients(theta, problem, &theta.grads(), nullptr);
    if (s == 0) first = v;
    if (hook) hook(theta, problem, theta.grads());
    theta_optimizer.Step(theta.tensors(), theta.grads().tensors());
  }
  theta.ZeroGrad();
  return first;
}

double DualStep(const ParamSet& theta, TPropProblem& problem, const TPropConfig& config,
                BlockEngine& engine) {
  if (config.schedule == Schedule::kPm) {
    throw ConfigError("dual step is not part of the penalty method");
  }
  std::vector<Tensor> h_hat;
  engine.Evaluate(theta, problem, &h_hat);
  const std::size_t nb = problem.plan.num_blocks();
  const double step = config.alpha_u * problem.lambda;
  double residual = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const Tensor& h = problem.hidden.values[b];
    Tensor& u = problem.duals.values[b];
    residual += Norm(h, h_hat[b]);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double r = h[i] - h_hat[b][i] + u[i];
      u[i] += step * r;
    }
  }
  return nb == 0 ? 0.0 : residual / static_cast<double>(nb);
}

double MeanResidual(const ParamSet& theta, const TPropProblem& problem,
                    BlockEngine& engine) {
  std::vector<Tensor> h_hat;
  engine.Evaluate(theta, problem, &h_hat);
  const std::size_t nb = problem.plan.num_blocks();
  double residual = 0.0;
  for (std::size_t b = 0; b < nb; ++b) residual += Norm(problem.hidden.values[b], h_hat[b]);
  return nb == 0 ? 0.0 : residual / static_cast<double>(nb);
}

OuterIterationReport OuterIteration(ParamSet& theta, TPropProblem& problem,
                                    const TPropConfig& config, Optimizer& theta_optimizer,
                                    Optimizer& h_optimizer, BlockEngine& engine,
                                    const ThetaGradientHook& hook) {
  OuterIterationReport report;
  bool have_first = false;

  if (config.schedule == Schedule::kAlm) {
    const std::size_t rounds = std::max(config.h_steps, config.theta_steps);
    for (std::size_t r = 0; r < rounds; ++r) {
      const bool do_h = r < config.h_steps;
      const bool do_theta = r < config.theta_steps;
      theta.ZeroGrad();
      const AugmentedValue v =
          engine.Gradients(theta, problem, do_theta ? &theta.grads() : nullptr,
                           do_h ? &problem.hidden.grads : nullptr);
      if (!have_first) {
        report.first = v;
        have_first = true;
      }
      if (do_h) h_optimizer.Step(problem.hidden.values, problem.hidden.grads);
      if (do_theta) {
        if (hook) hook(theta, problem, theta.grads());
        theta_optimizer.Step(theta.tensors(), theta.grads().tensors());
      }
    }
    theta.ZeroGrad();
    if (!have_first) report.first = engine.Evaluate(theta, problem);
    report.residual = DualStep(theta, problem, config, engine);
    return report;
  }

  if (config.h_steps > 0) {
    const HStepReport h = HStep(theta, problem, config, h_optimizer, engine);
    report.first = h.first;
    report.backtracks = h.backtracks;
    have_first = true;
  }
  if (config.theta_steps > 0) {
    const AugmentedValue v = ThetaStep(theta, problem, config, theta_optimizer, engine, hook);
    if (!have_first) {
      report.first = v;
      have_first = true;
    }
  }
  if (!have_first) report.first = engine.Evaluate(theta, problem);
  report.residual = config.schedule == Schedule::kAdmm
                        ? DualStep(theta, problem, config, engine)
                        : MeanResidual(theta, problem, engine);
  return report;
}

std::vector<EpochMetrics> TrainBtprop(ParamSet& theta, const TokenStream& train,
                                      const TokenStream& valid, const TPropConfig& config,
                                      std::size_t threads, const TPropCallbacks& callbacks) {
  config.Validate();
  if (train.size() < 2) throw ArgumentError("training stream needs at least two tokens");
  const std::size_t d = theta.dims().hidden;
  const double scored = static_cast<double>(train.size() - 1);
  BlockEngine engine(threads);
  Optimizer theta_opt(config.theta_optimizer, config.lr_theta);
  std::vector<EpochMetrics> history;

  auto emit = [&](EpochMetrics m, std::chrono::steady_clock::time_point t0) {
    m.valid_ppl = Evaluate(theta, valid.span()).perplexity;
    m.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.push_back(m);
    if (callbacks.on_epoch) callbacks.on_epoch(m);
  };

  if (config.regime == Regime::kBatch) {
    TPropProblem problem =
        TPropProblem::Create(train.span(), config.block_size, d, config.lambda);
    problem.InitializeFromForward(theta);
    Optimizer h_opt(config.h_optimizer, config.lr_h);
    ThetaGradientHook hook;
    if (callbacks.on_theta_gradient) {
      hook = [&](const ParamSet& t, const TPropProblem& p, const GradSet& g) {
        callbacks.on_theta_gradient(0, t, p, g);
      };
    }
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      if (epoch > 1 && config.h_reinit_each_epoch) {
        problem.InitializeFromForward(theta);
        h_opt = Optimizer(config.h_optimizer, config.lr_h);
      }
      const OuterIterationReport rep =
          OuterIteration(theta, problem, config, theta_opt, h_opt, engine, hook);
      EpochMetrics m;
      m.epoch = epoch;
      m.train_loss = rep.first.prediction / scored;
      m.residual = rep.residual;
      m.backtracks = rep.backtracks;
      emit(m, t0);
    }
    return history;
  }

  const BlockPlan full(train.size(), config.block_size);
  const std::size_t nb = full.num_blocks();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Tensor carry(d);
    double loss = 0.0, residual = 0.0;
    std::size_t junctions = 0, backtracks = 0, segment = 0;
    for (std::size_t first = 0; first < nb; first += config.minibatch_blocks, ++segment) {
      const std::size_t last = std::min(nb, first + config.minibatch_blocks) - 1;
      const Block& a = full.block(first);
      const Block& z = full.block(last);
      const auto tokens = train.span().subspan(a.start, z.start + z.steps - a.start + 1);
      TPropProblem problem =
          TPropProblem::Create(tokens, config.block_size, d, config.lambda);
      problem.h_start = carry;
      problem.InitializeFromForward(theta);
      Optimizer h_opt(config.h_optimizer, config.lr_h);
      ThetaGradientHook hook;
      if (callbacks.on_theta_gradient) {
        hook = [&, segment](const ParamSet& t, const TPropProblem& p, const GradSet& g) {
          callbacks.on_theta_gradient(segment, t, p, g);
        };
      }
      const OuterIterationReport rep =
          OuterIteration(theta, problem, config, theta_opt, h_opt, engine, hook);
      const std::size_t k = problem.plan.num_blocks();
      loss += rep.first.prediction;
      residual += rep.residual * static_cast<double>(k);
      junctions += k;
      backtracks += rep.backtracks;
      carry = problem.hidden.values.back();
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss / scored;
    m.residual = junctions == 0 ? 0.0 : residual / static_cast<double>(junctions);
    m.backtracks = backtracks;
    emit(m, t0);
  }
  return history;
}

}  // namespace tprnn
