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

#include "tprnn/optim.h"

#include <cmath>
#include <string>

#include "tprnn/errors.h"

namespace tprnn {
namespace {

void CheckLayout(std::span<Tensor> params, std::span<const Tensor> grads,
                 const char* what) {
  if (params.size() != grads.size()) {
    throw DimensionError(std::string(what) + ": " + std::to_string(params.size()) +
                         " parameters vs " + std::to_string(grads.size()) +
                         " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    CheckSameShape(params[i], grads[i], what);
  }
}

}  // namespace

std::string_view OptimizerKindName(OptimizerKind kind) {
  return kind == OptimizerKind::kAdagrad ? "adagrad" : "sgd";
}

OptimizerKind ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adagrad") return OptimizerKind::kAdagrad;
  throw ArgumentError("unknown optimizer '" + std::string(name) +
                      "' (expected sgd|adagrad)");
}

void SgdStep(std::span<Tensor> params, std::span<const Tensor> grads, double lr) {
  CheckLayout(params, grads, "SgdStep");
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].data();
    const double* g = grads[i].data();
    for (std::size_t k = 0; k < params[i].size(); ++k) p[k] -= lr * g[k];
  }
}

void AdagradState::Step(std::span<Tensor> params, std::span<const Tensor> grads,
                        double lr) {
  CheckLayout(params, grads, "AdagradStep");
  if (acc_.empty()) {
    acc_.reserve(params.size());
    for (const Tensor& p : params) {
      Tensor z = p;
      z.SetZero();
      acc_.push_back(std::move(z));
    }
  } else if (acc_.size() != params.size()) {
    throw DimensionError("AdagradStep: accumulator layout does not match parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    CheckSameShape(acc_[i], params[i], "AdagradStep accumulator");
    double* p = params[i].data();
    double* a = acc_[i].data();
    const double* g = grads[i].data();
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      a[k] += g[k] * g[k];
      p[k] -= lr * g[k] / (std::sqrt(a[k]) + epsilon_);
    }
  }
}

void Optimizer::Step(std::span<Tensor> params, std::span<const Tensor> grads,
                     double lr) {
  if (kind_ == OptimizerKind::kSgd) {
    SgdStep(params, grads, lr);
  } else {
    adagrad_.Step(params, grads, lr);
  }
}

}  // namespace tprnn
