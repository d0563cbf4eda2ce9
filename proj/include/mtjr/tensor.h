// mtjr/tensor.h

// Copyright 2026  MTJR authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef MTJR_TENSOR_H_
#define MTJR_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mtjr {

using Shape = std::vector<int32_t>;

std::string ShapeToString(const Shape &shape);
size_t ShapeSize(const Shape &shape);

namespace internal {
struct TensorData {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until a backward pass reaches it
  bool requires_grad = false;
};
}  // namespace internal

// A shape plus row-major values, with an optional gradient slot. Copies are
// shallow: two Tensor objects may name the same storage, which is how the
// tape refers back to inputs and outputs. Use Clone() for a deep copy.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor Zeros(Shape shape, bool requires_grad = false);
  static Tensor Scalar(double value, bool requires_grad = false);
  // 2-D convenience constructor from nested rows; rows must be equal length.
  static Tensor FromRows(const std::vector<std::vector<double>> &rows,
                         bool requires_grad = false);

  bool Defined() const { return data_ != nullptr; }
  const Shape &shape() const { return data_->shape; }
  int32_t NumDims() const { return static_cast<int32_t>(data_->shape.size()); }
  int32_t Dim(int32_t i) const { return data_->shape[i]; }
  // Last axis; 1 for a scalar.
  int32_t NumCols() const;
  // Product of all but the last axis.
  int32_t NumRows() const;
  size_t Size() const { return data_->value.size(); }

  std::span<double> Values() { return data_->value; }
  std::span<const double> Values() const { return data_->value; }
  double Value(size_t i) const { return data_->value[i]; }
  double At(int32_t row, int32_t col) const {
    return data_->value[static_cast<size_t>(row) * NumCols() + col];
  }
  double Item() const;

  bool RequiresGrad() const { return data_->requires_grad; }
  void SetRequiresGrad(bool flag) { data_->requires_grad = flag; }
  bool HasGrad() const { return !data_->grad.empty(); }
  std::span<const double> Grad() const { return data_->grad; }
  // Allocates a zero gradient on first use.
  std::span<double> MutableGrad() const;
  // Sets an existing gradient to zero; no-op when absent.
  void ZeroGrad();

  Tensor Clone() const;
  bool SameStorage(const Tensor &other) const { return data_ == other.data_; }

 private:
  std::shared_ptr<internal::TensorData> data_;
};

// Ordered record of executed differentiable ops. Each recorded op owns a
// closure that reads its output gradient and accumulates into its inputs'
// gradients. Backward() walks the record once, newest first.
//
// A disabled tape records nothing; ops run forward only, which is what
// decoding and evaluation use.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  explicit Tape(bool enabled = true) : enabled_(enabled) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  bool Enabled() const { return enabled_; }

  // True when an op over these inputs must be recorded.
  bool ShouldRecord(std::initializer_list<const Tensor *> inputs) const;

  // Registers `output` as produced by an op; marks it requires_grad.
  void Record(Tensor output, BackwardFn backward);

  // Seeds d(loss)/d(loss) = 1 and runs every recorded op in reverse.
  // Parameters accumulate into existing gradients; call ZeroGrad between
  // steps. A tape can be run backward once.
  void Backward(const Tensor &loss);

  // Ops recorded over the tape's lifetime.
  size_t NumOps() const { return recorded_; }
  size_t NumVisited() const { return visited_; }

 private:
  struct Op {
    Tensor output;
    BackwardFn backward;
  };
  bool enabled_;
  bool consumed_ = false;
  size_t recorded_ = 0;
  size_t visited_ = 0;
  std::vector<Op> ops_;
};

}  // namespace mtjr

#endif  // MTJR_TENSOR_H_
