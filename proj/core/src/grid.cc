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


#include "tprnn/grid.h"

namespace tprnn {

std::vector<GridPoint> EnumerateGrid() {
  std::vector<GridPoint> out;
  for (double lambda : kGridLambda)
    for (double alpha_u : kGridAlphaU)
      for (double lr_h : kGridLrH)
        for (double lr_theta : kGridLrTheta)
          for (std::size_t ts : kGridThetaSteps)
            for (std::size_t hs : kGridHSteps)
              out.push_back({lambda, alpha_u, lr_h, lr_theta, ts, hs});
  return out;
}

}  // namespace tprnn
