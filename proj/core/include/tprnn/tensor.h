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

#ifndef TPRNN_TENSOR_H_
#define TPRNN_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tprnn {

// Dense row-major rank-1 or rank-2 array of doubles.
//
// A rank-1 tensor of length n reports rows() == n and cols() == 1, so
// matrix kernels can treat it as a column vector without special cases.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::size_t length);
  Tensor(std::size_t rows, std::size_t cols);

  static Tensor Vector(std::initializer_list<double> values);
  static Tensor Vector(std::span<const double> values);
  static Tensor Matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> row_major);

  int rank() const { return rank_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void Fill(double value);
  void SetZero() { Fill(0.0); }

  bool SameShape(const Tensor& other) const {
    return rank_ == other.rank_ && rows_ == other.rows_ && cols_ == other.cols_;
  }
  // "[r x c]" or "[n]".
  std::string ShapeString() const;

  bool AllFinite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.SameShape(b) && a.data_ == b.data_;
  }

 private:
  int rank_ = 1;
  std::size_t rows_ = 0;
  std::size_t cols_ = 1;
  std::vector<double> data_;
};

// Gradient carrier with the same shape as the tensor it mirrors. Backward
// passes accumulate into it; callers zero it between independent passes.
using Grad = Tensor;

// Throws DimensionError naming both shapes when a and b differ.
void CheckSameShape(const Tensor& a, const Tensor& b, const char* what);

// dst += scale * src
void AddScaled(Tensor& dst, const Tensor& src, double scale = 1.0);
double Dot(std::span<const double> a, std::span<const double> b);
double SquaredNorm(std::span<const double> v);
double MaxAbs(std::span<const double> v);
double MaxAbsDiff(const Tensor& a, const Tensor& b);

}  // namespace tprnn

#endif  // TPRNN_TENSOR_H_
