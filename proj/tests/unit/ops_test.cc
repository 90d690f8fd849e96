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
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"
#include "tprnn/errors.h"
#include "tprnn/ops.h"
#include "tprnn/tensor.h"

namespace tprnn {
namespace {

using testing::NumericGradient;
using testing::RandomTensor;
using testing::RelErr;

constexpr double kFdTol = 1e-4;

TEST(TensorTest, ShapesAndIndexing) {
  Tensor m = Tensor::Matrix(2, 3, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(m.rank(), 2);
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.at(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);
  EXPECT_EQ(m.ShapeString(), "[2 x 3]");

  Tensor v = Tensor::Vector({1, 2});
  EXPECT_EQ(v.rank(), 1);
  EXPECT_EQ(v.cols(), 1u);
  EXPECT_EQ(v.ShapeString(), "[2]");
}

TEST(TensorTest, MismatchedShapesThrow) {
  Tensor a(3), b(4);
  EXPECT_THROW(AddScaled(a, b), DimensionError);
  EXPECT_THROW(CheckSameShape(a, Tensor(3, 1), "test"), DimensionError);
  EXPECT_THROW(Tensor::Matrix(2, 2, {1, 2, 3}), DimensionError);
}

TEST(TensorTest, Reductions) {
  const Tensor a = Tensor::Vector({3, -4});
  EXPECT_EQ(Dot(a.span(), a.span()), 25.0);
  EXPECT_EQ(SquaredNorm(a.span()), 25.0);
  EXPECT_EQ(MaxAbs(a.span()), 4.0);
  EXPECT_EQ(MaxAbsDiff(a, Tensor::Vector({3, -1})), 3.0);
  Tensor b = a;
  AddScaled(b, a, -2.0);
  EXPECT_EQ(b, Tensor::Vector({-3, 4}));
}

TEST(MatVecTest, IdentityAndHandComputed) {
  EXPECT_EQ(MatVec(Tensor::Matrix(2, 2, {1, 0, 0, 1}), Tensor::Vector({3, 4})),
            Tensor::Vector({3, 4}));
  EXPECT_EQ(MatVec(Tensor::Matrix(2, 2, {1, 2, 3, 4}), Tensor::Vector({1, 1})),
            Tensor::Vector({3, 7}));
}

TEST(MatVecTest, MatchesBruteForceLoop) {
  Tensor w(5, 7);
  testing::FillRandom(w, 11);
  const Tensor v = RandomTensor(7, 12);
  const Tensor out = MatVec(w, v);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 7; ++j) s += w.at(i, j) * v[j];
    EXPECT_NEAR(out[i], s, 1e-14);
  }
}

TEST(MatVecTest, TransposeAndOuterKernels) {
  const Tensor w = Tensor::Matrix(2, 3, {1, 2, 3, 4, 5, 6});
  Tensor out(3);
  MatTVecAdd(w, Tensor::Vector({1, -1}).span(), out.span());
  EXPECT_EQ(out, Tensor::Vector({-3, -3, -3}));
  Tensor g(2, 3);
  OuterAdd(g, Tensor::Vector({1, 2}).span(), Tensor::Vector({1, 0, -1}).span());
  EXPECT_EQ(g, Tensor::Matrix(2, 3, {1, 0, -1, 2, 0, -2}));
  EXPECT_THROW(MatVec(w, Tensor(2)), DimensionError);
}

TEST(ActivationTest, FixedPointsAndSymmetry) {
  EXPECT_EQ(Sigmoid(0.0), 0.5);
  EXPECT_EQ(Tanh(Tensor::Vector({0.0}))[0], 0.0);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> dist(-30.0, 30.0);
  for (int i = 0; i < 100; ++i) {
    const double x = dist(gen);
    EXPECT_NEAR(Sigmoid(x) + Sigmoid(-x), 1.0, 1e-15);
  }
  EXPECT_TRUE(std::isfinite(Sigmoid(-800.0)));
  EXPECT_EQ(Sigmoid(800.0), 1.0);
}

TEST(SoftmaxXentTest, UniformLogitsGiveLogV) {
  const XentResult r = SoftmaxXent(Tensor(10), 3);
  EXPECT_NEAR(r.loss, std::log(10.0), 1e-15);
  EXPECT_NEAR(r.loss, 2.302585, 1e-6);
  double sum = 0.0;
  for (double g : r.dlogits.span()) sum += g;
  EXPECT_NEAR(sum, 0.0, 1e-15);
}

TEST(SoftmaxXentTest, DominantTargetGivesNearZeroLoss) {
  Tensor logits(5);
  logits[2] = 50.0;
  EXPECT_LT(SoftmaxXent(logits, 2).loss, 1e-20);
  logits[2] = 1e4;  // must not overflow
  EXPECT_EQ(SoftmaxXent(logits, 2).loss, 0.0);
  EXPECT_NEAR(SoftmaxXent(logits, 0).loss, 1e4, 1e-9);
}

TEST(SoftmaxXentTest, GradientMatchesFiniteDifferences) {
  Tensor logits = RandomTensor(6, 21, 2.0);
  const XentResult r = SoftmaxXent(logits, 4);
  const Tensor num = NumericGradient([&] { return SoftmaxXent(logits, 4).loss; }, logits);
  EXPECT_LE(RelErr(r.dlogits, num), 1e-6);
}

TEST(SoftmaxXentTest, BadTargetThrows) {
  EXPECT_THROW(SoftmaxXent(Tensor(3), 3), IndexError);
  SoftmaxXentOp op;
  EXPECT_THROW(op.Forward(Tensor(3), 7), IndexError);
}

TEST(SoftmaxTest, SumsToOne) {
  const Tensor p = Softmax(RandomTensor(8, 5, 3.0));
  double s = 0.0;
  for (double x : p.span()) {
    EXPECT_GT(x, 0.0);
    s += x;
  }
  EXPECT_NEAR(s, 1.0, 1e-15);
}

TEST(OpBackwardTest, AddAndHadamardHandCases) {
  const Tensor a = Tensor::Vector({1, 2}), b = Tensor::Vector({3, -4});
  const Tensor g = Tensor::Vector({0.5, -2});
  AddOp add;
  add.Forward(a, b);
  Grad da(2), db(2);
  add.Backward(g, da, db);
  EXPECT_EQ(da, g);
  EXPECT_EQ(db, g);

  HadamardOp had;
  EXPECT_EQ(had.Forward(a, b), Tensor::Vector({3, -8}));
  Grad ha(2), hb(2);
  had.Backward(g, ha, hb);
  EXPECT_EQ(ha, Hadamard(g, b));
  EXPECT_EQ(hb, Hadamard(g, a));
}

TEST(OpBackwardTest, BackwardAccumulates) {
  AddOp add;
  add.Forward(Tensor(2), Tensor(2));
  Grad da = Tensor::Vector({1, 1}), db(2);
  add.Backward(Tensor::Vector({2, 3}), da, db);
  EXPECT_EQ(da, Tensor::Vector({3, 4}));
}

TEST(OpBackwardTest, BackwardBeforeForwardThrows) {
  Grad d(2), e(2);
  EXPECT_THROW(SigmoidOp().Backward(Tensor(2), d), StateError);
  EXPECT_THROW(TanhOp().Backward(Tensor(2), d), StateError);
  EXPECT_THROW(AddOp().Backward(Tensor(2), d, e), StateError);
  EXPECT_THROW(HadamardOp().Backward(Tensor(2), d, e), StateError);
  Grad dw(2, 2);
  EXPECT_THROW(MatVecOp().Backward(Tensor(2), dw, d), StateError);
  EXPECT_THROW(SoftmaxXentOp().Backward(1.0, d), StateError);
}

// Every op against central differences of <w, op(x)> for a random w.
class OpGradcheckTest : public ::testing::TestWithParam<int> {};

TEST_P(OpGradcheckTest, UnaryOps) {
  const int seed = GetParam();
  Tensor x = RandomTensor(5, seed, 2.0);
  const Tensor w = RandomTensor(5, seed + 100);
  {
    SigmoidOp op;
    op.Forward(x);
    Grad dx(5);
    op.Backward(w, dx);
    const Tensor num = NumericGradient([&] { return Dot(w.span(), Sigmoid(x).span()); }, x);
    EXPECT_LE(RelErr(dx, num), kFdTol);
  }
  {
    TanhOp op;
    op.Forward(x);
    Grad dx(5);
    op.Backward(w, dx);
    const Tensor num = NumericGradient([&] { return Dot(w.span(), Tanh(x).span()); }, x);
    EXPECT_LE(RelErr(dx, num), kFdTol);
  }
}

TEST_P(OpGradcheckTest, BinaryOps) {
  const int seed = GetParam();
  Tensor a = RandomTensor(4, seed), b = RandomTensor(4, seed + 1);
  const Tensor w = RandomTensor(4, seed + 2);
  HadamardOp had;
  had.Forward(a, b);
  Grad da(4), db(4);
  had.Backward(w, da, db);
  auto f = [&] { return Dot(w.span(), Hadamard(a, b).span()); };
  EXPECT_LE(RelErr(da, NumericGradient(f, a)), kFdTol);
  EXPECT_LE(RelErr(db, NumericGradient(f, b)), kFdTol);

  AddOp add;
  add.Forward(a, b);
  Grad sa(4), sb(4);
  add.Backward(w, sa, sb);
  auto g = [&] { return Dot(w.span(), Add(a, b).span()); };
  EXPECT_LE(RelErr(sa, NumericGradient(g, a)), kFdTol);
  EXPECT_LE(RelErr(sb, NumericGradient(g, b)), kFdTol);
}

TEST_P(OpGradcheckTest, MatVec) {
  const int seed = GetParam();
  Tensor m(3, 4);
  testing::FillRandom(m, seed);
  Tensor v = RandomTensor(4, seed + 1);
  const Tensor w = RandomTensor(3, seed + 2);
  MatVecOp op;
  op.Forward(m, v);
  Grad dm(3, 4), dv(4);
  op.Backward(w, dm, dv);
  auto f = [&] { return Dot(w.span(), MatVec(m, v).span()); };
  EXPECT_LE(RelErr(dm, NumericGradient(f, m)), kFdTol);
  EXPECT_LE(RelErr(dv, NumericGradient(f, v)), kFdTol);
}

TEST_P(OpGradcheckTest, SoftmaxXentOp) {
  const int seed = GetParam();
  Tensor logits = RandomTensor(7, seed, 3.0);
  const std::size_t target = static_cast<std::size_t>(seed) % 7;
  SoftmaxXentOp op;
  op.Forward(logits, target);
  Grad d(7);
  op.Backward(2.0, d);
  const Tensor num =
      NumericGradient([&] { return 2.0 * SoftmaxXent(logits, target).loss; }, logits);
  EXPECT_LE(RelErr(d, num), kFdTol);
}

INSTANTIATE_TEST_SUITE_P(Seeds, OpGradcheckTest, ::testing::Range(1, 6));

}  // namespace
}  // namespace tprnn
