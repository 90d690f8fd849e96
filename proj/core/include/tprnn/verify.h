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


// Executable checks of the model's gradient algebra.
//
// CheckEquivalence tests, for a single time step with cell-only parameters
// and zero duals, that one vanilla gradient step on the free state h_t turns
// the penalty-method loss
//
//   l_pm(h) = l(h, y) + lambda/2 * ||g(x, h_prev) - h||^2
//
// into a theta-gradient equal to eta * lambda times the plain backprop
// gradient of l(g(x, h_prev), y), provided h_t starts at g(x, h_prev).
//
// GradcheckAll compares every analytic backward path against central finite
// differences.

#ifndef TPRNN_VERIFY_H_
#define TPRNN_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "tprnn/model.h"

namespace tprnn {

inline constexpr double kEquivalenceTolerance = 1e-8;
inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kQuadraticTolerance = 1e-10;
inline constexpr double kGradcheckEpsilon = 1e-5;

struct TensorDeviation {
  std::string name;
  double deviation = 0.0;  // ||lhs - rhs||_inf / ||rhs||_inf
};

struct EquivalenceReport {
  CellKind cell = CellKind::kElman;
  double eta = 0.0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool negative_control = false;
  std::vector<TensorDeviation> tensors;
  double max_deviation = 0.0;
  double ratio = 0.0;           // <lhs, grad> / <grad, grad>
  double expected_ratio = 0.0;  // eta * lambda
  double tolerance = kEquivalenceTolerance;
  bool passed = false;
};

// With negative_control set, h_t is displaced from g(x, h_prev) before the
// step, which breaks the identity.
EquivalenceReport CheckEquivalence(CellKind cell, ModelDims dims, double eta, double lambda,
                                   std::uint64_t seed, bool negative_control = false,
                                   double tolerance = kEquivalenceTolerance);

struct PathReport {
  std::string name;
  std::size_t checked = 0;  // scalar directions compared
  double max_rel_error = 0.0;
  double tolerance = kGradcheckTolerance;
  bool passed = false;
};

struct GradcheckReport {
  std::uint64_t seed = 0;
  double epsilon = kGradcheckEpsilon;
  std::vector<PathReport> paths;
  bool passed = false;
};

// Relative error of one path: max_i |a_i - n_i| / max_i max(|a_i|, |n_i|),
// zero when both are identically zero.
double RelativeError(const std::vector<double>& analytic, const std::vector<double>& numeric);

GradcheckReport GradcheckAll(std::uint64_t seed, double epsilon = kGradcheckEpsilon);

}  // namespace tprnn

#endif  // TPRNN_VERIFY_H_
