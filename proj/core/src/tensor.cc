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

#include "tprnn/tensor.h"

#include <algorithm>
#include <cmath>

#include "tprnn/errors.h"

namespace tprnn {

Tensor::Tensor(std::size_t length)
    : rank_(1), rows_(length), cols_(1), data_(length, 0.0) {}

Tensor::Tensor(std::size_t rows, std::size_t cols)
    : rank_(2), rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Tensor Tensor::Vector(std::initializer_list<double> values) {
  Tensor t(values.size());
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::Vector(std::span<const double> values) {
  Tensor t(values.size());
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::Matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> row_major) {
  if (row_major.size() != rows * cols) {
    throw DimensionError("Tensor::Matrix: " + std::to_string(row_major.size()) +
                         " values for a [" + std::to_string(rows) + " x " +
                         std::to_string(cols) + "] matrix");
  }
  Tensor t(rows, cols);
  std::copy(row_major.begin(), row_major.end(), t.data_.begin());
  return t;
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string Tensor::ShapeString() const {
  if (rank_ == 1) return "[" + std::to_string(rows_) + "]";
  return "[" + std::to_string(rows_) + " x " + std::to_string(cols_) + "]";
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.SameShape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " +
                         a.ShapeString() + " vs " + b.ShapeString());
  }
}

void AddScaled(Tensor& dst, const Tensor& src, double scale) {
  CheckSameShape(dst, src, "AddScaled");
  double* d = dst.data();
  const double* s = src.data();
  const std::size_t n = dst.size();
  for (std::size_t i = 0; i < n; ++i) d[i] += scale * s[i];
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("Dot: length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double SquaredNorm(std::span<const double> v) { return Dot(v, v); }

double MaxAbs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  CheckSameShape(a, b, "MaxAbsDiff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace tprnn
