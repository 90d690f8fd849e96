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


#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "oracles.h"
#include "tprnn/errors.h"
#include "tprnn/model.h"
#include "tprnn/ops.h"

namespace tprnn {
namespace {

using testing::NumericGradient;
using testing::RandomParams;
using testing::RandomTensor;
using testing::RandomTokens;
using testing::RelErr;

constexpr double kFdTol = 1e-4;

// Small hand-set model shared by the frozen-value tests.
ParamSet HandModel(CellKind cell) {
  ParamSet theta(cell, {3, 2, 2});
  theta[Slot::kEmbedding] = Tensor::Matrix(3, 2, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6});
  theta[Slot::kWy] = Tensor::Matrix(3, 2, {1, -1, 0.5, 0.5, -0.2, 0.3});
  theta[Slot::kBy] = Tensor::Vector({0, 0.1, -0.1});
  if (cell == CellKind::kElman) {
    theta[Slot::kWx] = Tensor::Matrix(2, 2, {0.5, -0.3, 0.2, 0.1});
    theta[Slot::kWh] = Tensor::Matrix(2, 2, {0.4, 0.0, -0.6, 0.3});
    theta[Slot::kB] = Tensor::Vector({0.05, -0.1});
  } else {
    theta[Slot::kWz] = Tensor::Matrix(2, 2, {0.2, 0.1, -0.3, 0.4});
    theta[Slot::kWr] = Tensor::Matrix(2, 2, {0.1, -0.1, 0.2, 0.2});
    theta[Slot::kWc] = Tensor::Matrix(2, 2, {0.5, 0.3, -0.4, 0.6});
    theta[Slot::kUz] = Tensor::Matrix(2, 2, {0.1, 0.2, 0.0, -0.1});
    theta[Slot::kUr] = Tensor::Matrix(2, 2, {0.3, -0.2, 0.1, 0.1});
    theta[Slot::kUc] = Tensor::Matrix(2, 2, {0.2, 0.0, 0.1, 0.3});
    theta[Slot::kBz] = Tensor::Vector({0.0, 0.1});
    theta[Slot::kBr] = Tensor::Vector({-0.1, 0.0});
    theta[Slot::kBc] = Tensor::Vector({0.05, 0.05});
  }
  return theta;
}

TEST(ParamSetTest, ElmanLayout) {
  const ParamSet theta(CellKind::kElman, {7, 3, 4});
  ASSERT_EQ(theta.num_tensors(), 6u);
  EXPECT_EQ(theta.name(0), "embedding");
  EXPECT_EQ(theta[Slot::kEmbedding].ShapeString(), "[7 x 3]");
  EXPECT_EQ(theta[Slot::kWx].ShapeString(), "[4 x 3]");
  EXPECT_EQ(theta[Slot::kWh].ShapeString(), "[4 x 4]");
  EXPECT_EQ(theta[Slot::kB].ShapeString(), "[4]");
  EXPECT_EQ(theta[Slot::kWy].ShapeString(), "[7 x 4]");
  EXPECT_EQ(theta[Slot::kBy].ShapeString(), "[7]");
  EXPECT_FALSE(theta.has(Slot::kWz));
  EXPECT_EQ(theta.NumScalars(), 21u + 12 + 16 + 4 + 28 + 7);
  EXPECT_EQ(theta.grads().size(), theta.num_tensors());
}

TEST(ParamSetTest, GruLayoutWithoutBias) {
  const ParamSet theta(CellKind::kGru, {7, 3, 4}, /*use_bias=*/false);
  EXPECT_EQ(theta.num_tensors(), 8u);
  EXPECT_FALSE(theta.has(Slot::kBz));
  EXPECT_FALSE(theta.has(Slot::kBy));
  EXPECT_EQ(theta[Slot::kUc].ShapeString(), "[4 x 4]");
  EXPECT_EQ(theta.Find("U_r"), theta.index(Slot::kUr));
  EXPECT_EQ(theta.Find("nope"), theta.num_tensors());
  EXPECT_THROW(theta.index(Slot::kBz), StateError);
}

TEST(ParamSetTest, InitRandomIsSeededAndLeavesBiasesZero) {
  ParamSet a(CellKind::kGru, {5, 3, 4}), b(CellKind::kGru, {5, 3, 4});
  a.InitRandom(9, 0.1);
  b.InitRandom(9, 0.1);
  EXPECT_EQ(a, b);
  b.InitRandom(10, 0.1);
  EXPECT_FALSE(a == b);
  EXPECT_EQ(MaxAbs(a[Slot::kBz].span()), 0.0);
  EXPECT_EQ(MaxAbs(a[Slot::kBy].span()), 0.0);
  EXPECT_GT(MaxAbs(a[Slot::kUz].span()), 0.0);
  EXPECT_LE(MaxAbs(a[Slot::kUz].span()), 0.1);
}

TEST(CellKindTest, Parse) {
  EXPECT_EQ(ParseCellKind("gru"), CellKind::kGru);
  EXPECT_EQ(ParseCellKind(CellKindName(CellKind::kElman)), CellKind::kElman);
  EXPECT_THROW(ParseCellKind("lstm"), ArgumentError);
}

TEST(CellForwardTest, ZeroWeightFixedPoints) {
  const ParamSet gru(CellKind::kGru, {4, 3, 5});
  const StepContext g = CellForward(gru, 2, Tensor(5));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(g.z[i], 0.5);
    EXPECT_EQ(g.r[i], 0.5);
    EXPECT_EQ(g.c[i], 0.0);
    EXPECT_EQ(g.h[i], 0.0);
  }
  const ParamSet elman(CellKind::kElman, {4, 3, 5});
  const StepContext e = CellForward(elman, 1, RandomTensor(5, 3));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(e.h[i], 0.5);
}

TEST(CellForwardTest, FrozenHandValues) {
  // Values from a NumPy transcription of the cell equations.
  const Tensor h_prev = Tensor::Vector({0.5, -0.25});
  const Tensor e = CellForward(HandModel(CellKind::kElman), 1, h_prev).h;
  EXPECT_NEAR(e[0], 0.569546223939229, 1e-15);
  EXPECT_NEAR(e[1], 0.40733340004593027, 1e-15);
  const Tensor g = CellForward(HandModel(CellKind::kGru), 1, h_prev).h;
  EXPECT_NEAR(g[0], 0.4243803545727478, 1e-15);
  EXPECT_NEAR(g[1], -0.02820519321002764, 1e-15);
}

TEST(CellForwardTest, MatchesReferenceLoops) {
  for (CellKind cell : {CellKind::kElman, CellKind::kGru}) {
    const ParamSet theta = RandomParams(cell, {7, 3, 4}, 5);
    const Tensor h = RandomTensor(4, 6);
    const Tensor got = CellForward(theta, 3, h).h;
    const auto want = testing::ref::CellStep(theta, 3, h.span());
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(got[i], want[i], 1e-14);
  }
}

TEST(CellForwardTest, BadTokenThrows) {
  const ParamSet theta(CellKind::kElman, {3, 2, 2});
  EXPECT_THROW(CellForward(theta, 3, Tensor(2)), IndexError);
  EXPECT_THROW(CellForward(theta, 0, Tensor(3)), DimensionError);
}

TEST(CellForwardTest, StateRanges) {
  for (int seed = 0; seed < 20; ++seed) {
    const ParamSet gru = RandomParams(CellKind::kGru, {6, 3, 8}, seed, 3.0);
    const ParamSet elman = RandomParams(CellKind::kElman, {6, 3, 8}, seed, 3.0);
    const Tensor h = RandomTensor(8, seed + 50, 0.999);
    const TokenId x = static_cast<TokenId>(seed % 6);
    const StepContext g = CellForward(gru, x, h);
    for (double v : g.h.span()) {
      EXPECT_GT(v, -1.0);
      EXPECT_LT(v, 1.0);
    }
    const StepContext e = CellForward(elman, x, h);
    for (double v : e.h.span()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

class CellGradcheckTest : public ::testing::TestWithParam<std::tuple<CellKind, int>> {};

TEST_P(CellGradcheckTest, MatchesFiniteDifferences) {
  const auto [cell, seed] = GetParam();
  ParamSet theta = RandomParams(cell, {7, 3, 4}, seed, 0.8);
  Tensor h_prev = RandomTensor(4, seed + 1);
  const Tensor w = RandomTensor(4, seed + 2);
  const TokenId x = static_cast<TokenId>(seed % 7);

  const StepContext ctx = CellForward(theta, x, h_prev);
  GradSet g = theta.ZeroGradSet();
  Tensor dh_prev(4);
  CellBackward(theta, ctx, w.span(), &g, dh_prev.span());

  auto f = [&] { return Dot(w.span(), CellForward(theta, x, h_prev).h.span()); };
  for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
    EXPECT_LE(RelErr(g[i], NumericGradient(f, theta.tensor(i))), kFdTol) << theta.name(i);
  }
  EXPECT_LE(RelErr(dh_prev, NumericGradient(f, h_prev)), kFdTol);
}

INSTANTIATE_TEST_SUITE_P(Cells, CellGradcheckTest,
                         ::testing::Combine(::testing::Values(CellKind::kElman, CellKind::kGru),
                                            ::testing::Range(0, 5)),
                         [](const auto& info) {
                           return std::string(CellKindName(std::get<0>(info.param))) +
                                  "_seed" + std::to_string(std::get<1>(info.param));
                         });

TEST(PredictTest, ZeroHeadIsUniform) {
  const ParamSet theta(CellKind::kElman, {5, 2, 3});
  const Tensor logits = Predict(theta, RandomTensor(3, 1));
  EXPECT_EQ(MaxAbs(logits.span()), 0.0);
}

TEST(PredictTest, HandComputed) {
  ParamSet theta(CellKind::kElman, {2, 1, 1});
  theta[Slot::kWy] = Tensor::Matrix(2, 1, {1, -1});
  EXPECT_EQ(Predict(theta, Tensor::Vector({2})), Tensor::Vector({2, -2}));
}

TEST(PredictTest, HeadGradientMatchesFiniteDifferences) {
  ParamSet theta = RandomParams(CellKind::kGru, {6, 2, 4}, 17);
  Tensor h = RandomTensor(4, 18);
  const XentResult x = SoftmaxXent(Predict(theta, h), 4);
  GradSet g = theta.ZeroGradSet();
  Tensor dh(4);
  PredictBackward(theta, h.span(), x.dlogits.span(), &g, dh.span());
  auto f = [&] { return SoftmaxXent(Predict(theta, h), 4).loss; };
  for (Slot s : {Slot::kWy, Slot::kBy}) {
    EXPECT_LE(RelErr(g[theta.index(s)], NumericGradient(f, theta[s])), kFdTol);
  }
  EXPECT_LE(RelErr(dh, NumericGradient(f, h)), kFdTol);
}

TEST(SeqForwardBackwardTest, UniformModelSingleTransition) {
  ParamSet theta(CellKind::kGru, {10, 4, 4});
  GradSet g = theta.ZeroGradSet();
  const std::vector<TokenId> tokens = {3, 7};
  EXPECT_NEAR(SeqForwardBackward(theta, tokens, Tensor(4), g).loss, std::log(10.0), 1e-15);
}

TEST(SeqForwardBackwardTest, FrozenHandLoss) {
  const std::vector<TokenId> tokens = {0, 1, 2, 1};
  for (auto [cell, want, h0, h1] :
       {std::tuple{CellKind::kElman, 2.945990159361534, 0.46241663000614014, 0.4139537084540141},
        std::tuple{CellKind::kGru, 3.142208177794754, 0.08444955191929403, 0.3680120147583569}}) {
    const ParamSet theta = HandModel(cell);
    GradSet g = theta.ZeroGradSet();
    const SeqResult r = SeqForwardBackward(theta, tokens, Tensor(2), g);
    EXPECT_NEAR(r.loss, want, 1e-14);
    EXPECT_NEAR(r.h_final[0], h0, 1e-15);
    EXPECT_NEAR(r.h_final[1], h1, 1e-15);
  }
}

TEST(SeqForwardBackwardTest, LossIsSumOfIndependentStepLosses) {
  for (CellKind cell : {CellKind::kElman, CellKind::kGru}) {
    const ParamSet theta = RandomParams(cell, {9, 4, 6}, 31);
    const auto tokens = RandomTokens(25, 9, 32);
    const Tensor h0 = RandomTensor(6, 33);
    GradSet g = theta.ZeroGradSet();
    const double got = SeqForwardBackward(theta, tokens, h0, g).loss;
    EXPECT_NEAR(got, testing::ref::SeqLoss(theta, tokens, h0.span()), 1e-12);
    EXPECT_NEAR(got, ForwardLoss(theta, tokens, h0.span()), 1e-12);
  }
}

TEST(SeqForwardBackwardTest, GradientsMatchFiniteDifferences) {
  for (CellKind cell : {CellKind::kElman, CellKind::kGru}) {
    ParamSet theta = RandomParams(cell, {5, 3, 4}, 41, 0.8);
    const auto tokens = RandomTokens(6, 5, 42);
    Tensor h0 = RandomTensor(4, 43);
    GradSet g = theta.ZeroGradSet();
    const SeqResult r = SeqForwardBackward(theta, tokens, h0, g);
    auto f = [&] { return testing::ref::SeqLoss(theta, tokens, h0.span()); };
    EXPECT_LE(RelErr(r.dh_init, NumericGradient(f, h0)), kFdTol);
    for (std::size_t i = 0; i < theta.num_tensors(); ++i) {
      EXPECT_LE(RelErr(g[i], NumericGradient(f, theta.tensor(i))), kFdTol) << theta.name(i);
    }
  }
}

TEST(SeqForwardBackwardTest, AccumulatesIntoGradients) {
  const ParamSet theta = RandomParams(CellKind::kGru, {5, 3, 4}, 2);
  const auto tokens = RandomTokens(5, 5, 3);
  GradSet once = theta.ZeroGradSet(), twice = theta.ZeroGradSet();
  SeqForwardBackward(theta, tokens, Tensor(4), once);
  SeqForwardBackward(theta, tokens, Tensor(4), twice);
  SeqForwardBackward(theta, tokens, Tensor(4), twice);
  GradSet doubled = once;
  doubled.Add(once);
  EXPECT_LE(twice.MaxAbsDiff(doubled), 1e-12);
}

TEST(SeqForwardBackwardTest, TooShortThrows) {
  const ParamSet theta(CellKind::kElman, {3, 2, 2});
  GradSet g = theta.ZeroGradSet();
  EXPECT_THROW(SeqForwardBackward(theta, std::vector<TokenId>{}, Tensor(2), g), ArgumentError);
  EXPECT_THROW(SeqForwardBackward(theta, std::vector<TokenId>{1}, Tensor(2), g), ArgumentError);
}

TEST(TruncationTest, JunctionFlowIsARealDifference) {
  const ParamSet theta = RandomParams(CellKind::kGru, {6, 3, 5}, 77);
  const auto tokens = RandomTokens(11, 6, 78);
  const std::span<const TokenId> all(tokens);

  GradSet fused = theta.ZeroGradSet();
  SeqForwardBackward(theta, all, Tensor(5), fused);

  GradSet split = theta.ZeroGradSet();
  const SeqResult first = SeqForwardBackward(theta, all.subspan(0, 6), Tensor(5), split);
  const SeqResult second = SeqForwardBackward(theta, all.subspan(5), first.h_final, split);
  EXPECT_GT(fused.MaxAbsDiff(split), 1e-6);

  // Adding the junction gradient back through the first window recovers
  // the fused gradient.
  Unroll u;
  u.Forward(theta, all.subspan(0, 6), Tensor(5).span());
  Tensor unused(5);
  u.Backward(theta, second.dh_init.span(), &split, unused.span(), /*with_prediction=*/false);
  EXPECT_LE(fused.MaxAbsDiff(split), 1e-12);
}

TEST(UnrollTest, PenaltyOnlyBackwardMatchesFiniteDifferences) {
  ParamSet theta = RandomParams(CellKind::kElman, {5, 3, 4}, 90);
  const auto tokens = RandomTokens(4, 5, 91);
  Tensor h0 = RandomTensor(4, 92);
  const Tensor w = RandomTensor(4, 93);
  Unroll u;
  u.Forward(theta, tokens, h0.span());
  GradSet g = theta.ZeroGradSet();
  Tensor dh0(4);
  u.Backward(theta, w.span(), &g, dh0.span(), /*with_prediction=*/false);
  auto f = [&] {
    Tensor h;
    ForwardLoss(theta, tokens, h0.span(), &h);
    return Dot(w.span(), h.span());
  };
  EXPECT_LE(RelErr(dh0, NumericGradient(f, h0)), kFdTol);
  EXPECT_LE(RelErr(g[theta.index(Slot::kWh)], NumericGradient(f, theta[Slot::kWh])), kFdTol);
  EXPECT_EQ(MaxAbs(g[theta.index(Slot::kWy)].span()), 0.0);
}

TEST(UnrollTest, BackwardBeforeForwardThrows) {
  const ParamSet theta(CellKind::kElman, {3, 2, 2});
  Unroll u;
  Tensor dh(2);
  EXPECT_THROW(u.Backward(theta, {}, nullptr, dh.span()), StateError);
  EXPECT_THROW(u.final_state(), StateError);
}

}  // namespace
}  // namespace tprnn
