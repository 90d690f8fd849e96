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


// The hyperparameter grid searched for blocked target propagation.

#ifndef TPRNN_GRID_H_
#define TPRNN_GRID_H_

#include <array>
#include <cstddef>
#include <vector>

namespace tprnn {

inline constexpr std::array<double, 3> kGridLambda = {1.0, 0.1, 0.01};
inline constexpr std::array<double, 3> kGridAlphaU = {1.0, 0.1, 0.01};
inline constexpr std::array<double, 3> kGridLrH = {0.1, 0.01, 0.001};
inline constexpr std::array<double, 3> kGridLrTheta = {0.1, 0.01, 0.001};
inline constexpr std::array<std::size_t, 1> kGridThetaSteps = {1};
inline constexpr std::array<std::size_t, 3> kGridHSteps = {1, 2, 5};

struct GridPoint {
  double lambda = 0.0;
  double alpha_u = 0.0;
  double lr_h = 0.0;
  double lr_theta = 0.0;
  std::size_t theta_steps = 0;
  std::size_t h_steps = 0;

  friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

// Full cross product in a fixed order (lambda outermost, h_steps innermost).
std::vector<GridPoint> EnumerateGrid();

}  // namespace tprnn

#endif  // TPRNN_GRID_H_
