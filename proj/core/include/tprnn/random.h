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

#ifndef TPRNN_RANDOM_H_
#define TPRNN_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

#include "tprnn/tensor.h"

namespace tprnn {

// Seed splitting rule: every consumer of randomness asks for a child seed by
// name, child = splitmix64(root ^ fnv1a64(name)). Two names never share a
// stream, and adding a new consumer does not perturb existing ones.
std::uint64_t DeriveSeed(std::uint64_t root, std::string_view name);

std::uint64_t Fnv1a64(std::string_view bytes);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [lo, hi), built from the top 53 bits of the engine output so
  // the sequence does not depend on the standard library's distributions.
  double Uniform(double lo, double hi);
  std::size_t Index(std::size_t n);

  void FillUniform(Tensor& t, double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

}  // namespace tprnn

#endif  // TPRNN_RANDOM_H_
