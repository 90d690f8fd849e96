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

#ifndef TPRNN_OPTIM_H_
#define TPRNN_OPTIM_H_

#include <span>
#include <string_view>
#include <vector>

#include "tprnn/tensor.h"

namespace tprnn {

enum class OptimizerKind { kSgd, kAdagrad };

std::string_view OptimizerKindName(OptimizerKind kind);
OptimizerKind ParseOptimizerKind(std::string_view name);

inline constexpr double kAdagradEpsilon = 1e-8;

// p <- p - lr * g
void SgdStep(std::span<Tensor> params, std::span<const Tensor> grads, double lr);

// acc += g^2; p <- p - lr * g / (sqrt(acc) + eps)
class AdagradState {
 public:
  explicit AdagradState(double epsilon = kAdagradEpsilon) : epsilon_(epsilon) {}

  // Accumulators are created as zeros on the first step, matching the
  // parameter shapes; later steps must present the same layout.
  void Step(std::span<Tensor> params, std::span<const Tensor> grads, double lr);

  double epsilon() const { return epsilon_; }
  const std::vector<Tensor>& accumulators() const { return acc_; }

 private:
  double epsilon_;
  std::vector<Tensor> acc_;
};

// Update rule plus its learning rate.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr) : kind_(kind), lr_(lr) {}

  OptimizerKind kind() const { return kind_; }
  double lr() const { return lr_; }
  const AdagradState& adagrad() const { return adagrad_; }

  void Step(std::span<Tensor> params, std::span<const Tensor> grads) {
    Step(params, grads, lr_);
  }
  void Step(std::span<Tensor> params, std::span<const Tensor> grads, double lr);

 private:
  OptimizerKind kind_;
  double lr_;
  AdagradState adagrad_;
};

}  // namespace tprnn

#endif  // TPRNN_OPTIM_H_
