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


#include "tprnn/verify.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tprnn/btprop.h"
#include "tprnn/ops.h"
#include "tprnn/random.h"

namespace tprnn {
namespace {

bool IsHead(const ParamSet& theta, std::size_t i) {
  return (theta.has(Slot::kWy) && i == theta.index(Slot::kWy)) ||
         (theta.has(Slot::kBy) && i == theta.index(Slot::kBy));
}

void RandomizeAll(ParamSet& theta, std::uint64_t seed, double scale) {
  for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
    Rng rng(DeriveSeed(seed, "param/" + theta.name(i)));
    rng.FillUniform(theta.tensor(i), -scale, scale);
  }
}

Tensor RandomVector(std::size_t n, std::uint64_t seed, std::string_view name, double scale) {
  Tensor t(n);
  Rng rng(DeriveSeed(seed, name));
  rng.FillUniform(t, -scale, scale);
  return t;
}

// Central differences of f along every scalar of t, appended to out.
void Probe(Tensor& t, const std::function<double()>& f, double eps,
           std::vector<double>& out) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = t[i];
    t[i] = x + eps;
    const double fp = f();
    t[i] = x - eps;
    const double fm = f();
    t[i] = x;
    out.push_back((fp - fm) / (2.0 * eps));
  }
}

void Append(const Tensor& t, std::vector<double>& out) {
  out.insert(out.end(), t.span().begin(), t.span().end());
}

PathReport Finish(std::string name, const std::vector<double>& analytic,
                  const std::vector<double>& numeric, double tolerance) {
  PathReport p;
  p.name = std::move(name);
  p.checked = analytic.size();
  p.max_rel_error = RelativeError(analytic, numeric);
  p.tolerance = tolerance;
  p.passed = p.max_rel_error <= tolerance;
  return p;
}

constexpr ModelDims kCheckDims{5, 3, 4};

PathReport CheckCell(CellKind cell, std::uint64_t seed, double eps) {
  ParamSet theta(cell, kCheckDims);
  RandomizeAll(theta, DeriveSeed(seed, CellKindName(cell)), 0.8);
  Tensor h_prev = RandomVector(kCheckDims.hidden, seed, "cell/h_prev", 1.0);
  const Tensor w = RandomVector(kCheckDims.hidden, seed, "cell/projection", 1.0);
  Rng rng(DeriveSeed(seed, "cell/token"));
  const TokenId x = static_cast<TokenId>(rng.Index(kCheckDims.vocab));

  const StepContext ctx = CellForward(theta, x, h_prev);
  GradSet g = theta.ZeroGradSet();
  Tensor dh_prev(kCheckDims.hidden);
  CellBackward(theta, ctx, w.span(), &g, dh_prev.span());

  auto f = [&] { return Dot(w.span(), CellForward(theta, x, h_prev).h.span()); };
  std::vector<double> analytic, numeric;
  for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
    if (IsHead(theta, i)) continue;
    Append(g[i], analytic);
    Probe(theta.tensor(i), f, eps, numeric);
  }
  Append(dh_prev, analytic);
  Probe(h_prev, f, eps, numeric);
  return Finish(std::string(CellKindName(cell)) + "_cell", analytic, numeric,
                kGradcheckTolerance);
}

PathReport CheckHead(std::uint64_t seed, double eps) {
  ParamSet theta(CellKind::kElman, kCheckDims);
  RandomizeAll(theta, DeriveSeed(seed, "head"), 0.8);
  Tensor h = RandomVector(kCheckDims.hidden, seed, "head/h", 1.0);
  Rng rng(DeriveSeed(seed, "head/token"));
  const std::size_t y = rng.Index(kCheckDims.vocab);

  const XentResult xent = SoftmaxXent(Predict(theta, h), y);
  GradSet g = theta.ZeroGradSet();
  Tensor dh(kCheckDims.hidden);
  PredictBackward(theta, h.span(), xent.dlogits.span(), &g, dh.span());

  auto f = [&] { return SoftmaxXent(Predict(theta, h), y).loss; };
  std::vector<double> analytic, numeric;
  for (Slot s : {Slot::kWy, Slot::kBy}) {
    Append(g[theta.index(s)], analytic);
    Probe(theta[s], f, eps, numeric);
  }
  Append(dh, analytic);
  Probe(h, f, eps, numeric);
  return Finish("lm_head", analytic, numeric, kGradcheckTolerance);
}

PathReport CheckPenalty(std::uint64_t seed, double eps) {
  const std::size_t d = kCheckDims.hidden;
  Tensor h_next = RandomVector(d, seed, "penalty/h_next", 1.0);
  Tensor h_hat = RandomVector(d, seed, "penalty/h_hat", 1.0);
  const Tensor u = RandomVector(d, seed, "penalty/u", 0.5);
  Rng rng(DeriveSeed(seed, "penalty/lambda"));
  const double lambda = rng.Uniform(0.1, 1.0);

  const PenaltyResult p = BoundaryPenalty(h_next, h_hat, u, lambda);
  auto f = [&] { return BoundaryPenalty(h_next, h_hat, u, lambda).value; };
  std::vector<double> analytic, numeric;
  Append(p.d_next, analytic);
  Probe(h_next, f, eps, numeric);
  Append(p.d_hat, analytic);
  Probe(h_hat, f, eps, numeric);
  return Finish("boundary_penalty", analytic, numeric, kQuadraticTolerance);
}

// A 3-block instance with displaced free variables and nonzero duals.
struct BlockInstance {
  std::vector<TokenId> tokens;
  ParamSet theta;
  TPropProblem problem;
};

BlockInstance MakeBlockInstance(CellKind cell, std::uint64_t seed) {
  const std::string tag = "blocks/" + std::string(CellKindName(cell));
  BlockInstance inst{{}, ParamSet(cell, kCheckDims), {}};
  RandomizeAll(inst.theta, DeriveSeed(seed, tag + "/theta"), 0.8);
  Rng rng(DeriveSeed(seed, tag + "/tokens"));
  constexpr std::size_t kBlock = 2;
  inst.tokens.resize(3 * kBlock + 1);
  for (TokenId& t : inst.tokens) t = static_cast<TokenId>(rng.Index(kCheckDims.vocab));
  const double lambda = rng.Uniform(0.1, 1.0);
  inst.problem = TPropProblem::Create(inst.tokens, kBlock, kCheckDims.hidden, lambda);
  inst.problem.h_start = RandomVector(kCheckDims.hidden, seed, tag + "/h_start", 1.0);
  for (std::size_t b = 0; b < inst.problem.plan.num_blocks(); ++b) {
    const std::string k = std::to_string(b);
    inst.problem.hidden.values[b] = RandomVector(kCheckDims.hidden, seed, tag + "/H" + k, 1.0);
    inst.problem.duals.values[b] = RandomVector(kCheckDims.hidden, seed, tag + "/u" + k, 0.3);
  }
  return inst;
}

std::vector<PathReport> CheckBlocks(CellKind cell, std::uint64_t seed, double eps) {
  BlockInstance inst = MakeBlockInstance(cell, seed);
  TPropProblem& problem = inst.problem;
  ParamSet& theta = inst.theta;
  BlockEngine engine;
  const std::string suffix = "/" + std::string(CellKindName(cell));

  GradSet dtheta = theta.ZeroGradSet();
  std::vector<Tensor> dh, h_hat;
  engine.Gradients(theta, problem, &dtheta, &dh, &h_hat);
  auto f = [&] { return engine.Evaluate(theta, problem).total(); };

  std::vector<PathReport> out;
  {
    std::vector<double> analytic, numeric;
    for (std::size_t b = 0; b < dh.size(); ++b) {
      Append(dh[b], analytic);
      Probe(problem.hidden.values[b], f, eps, numeric);
    }
    out.push_back(Finish("free_variables" + suffix, analytic, numeric, kGradcheckTolerance));
  }
  {
    std::vector<double> analytic, numeric;
    for (std::size_t b = 0; b < h_hat.size(); ++b) {
      const PenaltyResult p = BoundaryPenalty(problem.hidden.values[b], h_hat[b],
                                              problem.duals.values[b], problem.lambda);
      Append(p.d_u, analytic);
      Probe(problem.duals.values[b], f, eps, numeric);
    }
    out.push_back(Finish("dual_term" + suffix, analytic, numeric, kGradcheckTolerance));
  }
  {
    std::vector<double> analytic, numeric;
    for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
      Append(dtheta[i], analytic);
      Probe(theta.tensor(i), f, eps, numeric);
    }
    out.push_back(Finish("block_theta" + suffix, analytic, numeric, kGradcheckTolerance));
  }
  return out;
}

}  // namespace

double RelativeError(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double diff = 0.0, scale = 0.0;
  const std::size_t n = std::min(analytic.size(), numeric.size());
  for (std::size_t i = 0; i < n; ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max({scale, std::abs(analytic[i]), std::abs(numeric[i])});
  }
  if (analytic.size() != numeric.size()) return std::numeric_limits<double>::infinity();
  if (scale == 0.0) return 0.0;
  return diff / scale;
}

EquivalenceReport CheckEquivalence(CellKind cell, ModelDims dims, double eta, double lambda,
                                   std::uint64_t seed, bool negative_control,
                                   double tolerance) {
  EquivalenceReport report;
  report.cell = cell;
  report.eta = eta;
  report.lambda = lambda;
  report.seed = seed;
  report.negative_control = negative_control;
  report.expected_ratio = eta * lambda;
  report.tolerance = tolerance;

  ParamSet theta(cell, dims, /*use_bias=*/false);
  RandomizeAll(theta, DeriveSeed(seed, "equivalence/theta"), 0.5);
  const Tensor h_prev = RandomVector(dims.hidden, seed, "equivalence/h_prev", 1.0);
  Rng rng(DeriveSeed(seed, "equivalence/tokens"));
  const TokenId x = static_cast<TokenId>(rng.Index(dims.vocab));
  const TokenId y = static_cast<TokenId>(rng.Index(dims.vocab));
  const TokenId tokens[2] = {x, y};

  const Tensor g = CellForward(theta, x, h_prev).h;
  Tensor h = g;
  if (negative_control) {
    AddScaled(h, RandomVector(dims.hidden, seed, "equivalence/displacement", 0.5));
  }

  // Gradient of l_pm at h, then one vanilla descent step.
  const XentResult xent = SoftmaxXent(Predict(theta, h), y);
  Tensor dh(dims.hidden);
  PredictBackward(theta, h.span(), xent.dlogits.span(), nullptr, dh.span());
  Tensor h_tilde(dims.hidden);
  for (std::size_t i = 0; i < dims.hidden; ++i) {
    dh[i] += lambda * (h[i] - g[i]);
    h_tilde[i] = h[i] - eta * dh[i];
  }

  // Left side: theta-gradient of the penalty at h_tilde. The prediction term
  // of l_pm(h_tilde) does not depend on the cell parameters.
  GradSet lhs = theta.ZeroGradSet();
  BlockForwardBackward(theta, tokens, h_prev, h_tilde, Tensor(dims.hidden), lambda, &lhs,
                       BlockTerms{.prediction = false, .penalty = true});

  // Right side: plain backprop through the same step.
  GradSet grad = theta.ZeroGradSet();
  SeqForwardBackward(theta, tokens, h_prev, grad);

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
    if (IsHead(theta, i)) continue;
    double diff = 0.0, scale = 0.0, lhs_max = 0.0;
    for (std::size_t k = 0; k < lhs[i].size(); ++k) {
      const double r = eta * lambda * grad[i][k];
      diff = std::max(diff, std::abs(lhs[i][k] - r));
      scale = std::max(scale, std::abs(r));
      lhs_max = std::max(lhs_max, std::abs(lhs[i][k]));
      num += lhs[i][k] * grad[i][k];
      den += grad[i][k] * grad[i][k];
    }
    double dev = 0.0;
    if (scale > 0.0) {
      dev = diff / scale;
    } else if (lhs_max > 0.0) {
      dev = std::numeric_limits<double>::infinity();
    }
    report.tensors.push_back({theta.name(i), dev});
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  report.ratio = den > 0.0 ? num / den : 0.0;
  report.passed = report.max_deviation <= tolerance;
  return report;
}

GradcheckReport GradcheckAll(std::uint64_t seed, double epsilon) {
  GradcheckReport report;
  report.seed = seed;
  report.epsilon = epsilon;
  report.paths.push_back(CheckCell(CellKind::kElman, seed, epsilon));
  report.paths.push_back(CheckCell(CellKind::kGru, seed, epsilon));
  report.paths.push_back(CheckHead(seed, epsilon));
  report.paths.push_back(CheckPenalty(seed, epsilon));
  for (CellKind cell : {CellKind::kElman, CellKind::kGru}) {
    for (PathReport& p : CheckBlocks(cell, seed, epsilon)) report.paths.push_back(std::move(p));
  }
  report.passed = std::all_of(report.paths.begin(), report.paths.end(),
                              [](const PathReport& p) { return p.passed; });
  return report;
}

}  // namespace tprnn
