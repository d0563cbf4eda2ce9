// src/tensor.cc

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

#include "mtjr/tensor.h"

#include <algorithm>
#include <sstream>

#include "mtjr/error.h"

namespace mtjr {

std::string ShapeToString(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

size_t ShapeSize(const Shape &shape) {
  size_t n = 1;
  for (int32_t d : shape) {
    if (d < 0) throw Error(ErrorCode::kShapeMismatch, "negative dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : data_(std::make_shared<internal::TensorData>()) {
  if (ShapeSize(shape) != values.size())
    throw Error(ErrorCode::kShapeMismatch,
                "shape " + ShapeToString(shape) + " does not hold " +
                    std::to_string(values.size()) + " values");
  data_->shape = std::move(shape);
  data_->value = std::move(values);
  data_->requires_grad = requires_grad;
}

Tensor Tensor::Zeros(Shape shape, bool requires_grad) {
  size_t n = ShapeSize(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::Scalar(double value, bool requires_grad) {
  return Tensor({}, {value}, requires_grad);
}

Tensor Tensor::FromRows(const std::vector<std::vector<double>> &rows,
                        bool requires_grad) {
  int32_t r = static_cast<int32_t>(rows.size());
  int32_t c = r ? static_cast<int32_t>(rows[0].size()) : 0;
  std::vector<double> v;
  v.reserve(static_cast<size_t>(r) * c);
  for (const auto &row : rows) {
    if (static_cast<int32_t>(row.size()) != c)
      throw Error(ErrorCode::kShapeMismatch, "ragged rows");
    v.insert(v.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(v), requires_grad);
}

int32_t Tensor::NumCols() const {
  return data_->shape.empty() ? 1 : data_->shape.back();
}

int32_t Tensor::NumRows() const {
  int32_t n = 1;
  for (size_t i = 0; i + 1 < data_->shape.size(); ++i) n *= data_->shape[i];
  return n;
}

double Tensor::Item() const {
  if (Size() != 1)
    throw Error(ErrorCode::kNotScalar,
                "Item() on tensor of shape " + ShapeToString(shape()));
  return data_->value[0];
}

std::span<double> Tensor::MutableGrad() const {
  if (data_->grad.empty()) data_->grad.assign(data_->value.size(), 0.0);
  return data_->grad;
}

void Tensor::ZeroGrad() {
  std::fill(data_->grad.begin(), data_->grad.end(), 0.0);
}

Tensor Tensor::Clone() const {
  Tensor t(data_->shape, data_->value, data_->requires_grad);
  return t;
}

bool Tape::ShouldRecord(std::initializer_list<const Tensor *> inputs) const {
  if (!enabled_) return false;
  for (const Tensor *t : inputs)
    if (t->Defined() && t->RequiresGrad()) return true;
  return false;
}

void Tape::Record(Tensor output, BackwardFn backward) {
  output.SetRequiresGrad(true);
  ops_.push_back({std::move(output), std::move(backward)});
  ++recorded_;
}

void Tape::Backward(const Tensor &loss) {
  if (loss.Size() != 1)
    throw Error(ErrorCode::kNotScalar,
                "backward from tensor of shape " + ShapeToString(loss.shape()));
  if (consumed_)
    throw Error(ErrorCode::kInvalidArgument, "tape already run backward");
  consumed_ = true;
  Tensor seed = loss;
  seed.MutableGrad()[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    ++visited_;
    // Ops that do not feed the loss never received a gradient.
    if (it->output.HasGrad()) it->backward();
  }
  // Release intermediates; parameters keep their gradients.
  ops_.clear();
}

}  // namespace mtjr
