// mtjr/grad-check.h

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

#ifndef MTJR_GRAD_CHECK_H_
#define MTJR_GRAD_CHECK_H_

#include <functional>
#include <span>

#include "mtjr/tensor.h"

namespace mtjr {

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Location of the worst element: which input, which flat index.
  size_t worst_input = 0;
  size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  size_t num_checked = 0;
};

// Compares the tape's gradient of a scalar function against central
// differences (f(x+h) - f(x-h)) / 2h for every element of every input.
// The relative error of an element is |a - n| / max(|a|, |n|, 1e-8).
//
// `f` must rebuild the whole computation from the current input values each
// time it is called, and be deterministic (reseed any dropout rng inside).
// Existing gradients on `inputs` are cleared first and hold the analytic
// gradient on return.
GradCheckResult GradCheck(const std::function<Tensor(Tape &)> &f,
                          std::span<Tensor> inputs, double h = 1e-5);

}  // namespace mtjr

#endif  // MTJR_GRAD_CHECK_H_
