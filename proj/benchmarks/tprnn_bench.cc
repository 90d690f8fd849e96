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


#include <vector>

#include "benchmark/benchmark.h"
#include "tprnn/btprop.h"
#include "tprnn/model.h"
#include "tprnn/optim.h"
#include "tprnn/random.h"

namespace tprnn {
namespace {

ParamSet MakeParams(CellKind cell, std::size_t hidden) {
  ParamSet theta(cell, {66, hidden, hidden});
  theta.InitRandom(1, 0.1);
  return theta;
}

std::vector<TokenId> MakeTokens(std::size_t n) {
  Rng rng(2);
  std::vector<TokenId> out(n);
  for (TokenId& t : out) t = static_cast<TokenId>(rng.Index(66));
  return out;
}

void BM_CellForward(benchmark::State& state) {
  const auto cell = static_cast<CellKind>(state.range(0));
  const ParamSet theta = MakeParams(cell, static_cast<std::size_t>(state.range(1)));
  const Tensor h(theta.dims().hidden);
  StepContext ctx;
  for (auto _ : state) {
    benchmark::DoNotOptimize(CellForward(theta, 3, h.span(), ctx).data());
  }
}
BENCHMARK(BM_CellForward)->ArgsProduct({{0, 1}, {16, 64, 128}});

void BM_SeqForwardBackward(benchmark::State& state) {
  const auto cell = static_cast<CellKind>(state.range(0));
  const ParamSet theta = MakeParams(cell, 64);
  const auto tokens = MakeTokens(11);
  GradSet g = theta.ZeroGradSet();
  const Tensor h(64);
  for (auto _ : state) {
    benchmark::DoNotOptimize(SeqForwardBackward(theta, tokens, h, g).loss);
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_SeqForwardBackward)->Arg(0)->Arg(1);

void BM_BlockEngineGradients(benchmark::State& state) {
  const ParamSet theta = MakeParams(CellKind::kGru, 32);
  const auto tokens = MakeTokens(1001);
  TPropProblem problem = TPropProblem::Create(tokens, 10, 32, 0.1);
  problem.InitializeFromForward(theta);
  BlockEngine engine(static_cast<std::size_t>(state.range(0)));
  GradSet g = theta.ZeroGradSet();
  std::vector<Tensor> dh;
  for (auto _ : state) {
    g.SetZero();
    benchmark::DoNotOptimize(engine.Gradients(theta, problem, &g, &dh).total());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_BlockEngineGradients)->Arg(1)->Arg(2)->Arg(4)->UseRealTime();

void BM_AdagradStep(benchmark::State& state) {
  ParamSet theta = MakeParams(CellKind::kGru, static_cast<std::size_t>(state.range(0)));
  GradSet g = theta.ZeroGradSet();
  for (Tensor& t : g.tensors()) t.Fill(1e-3);
  AdagradState opt;
  for (auto _ : state) {
    opt.Step(theta.tensors(), g.tensors(), 0.1);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(theta.NumScalars()));
}
BENCHMARK(BM_AdagradStep)->Arg(64)->Arg(256);

}  // namespace
}  // namespace tprnn

BENCHMARK_MAIN();
