// src/grad-check.cc

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

#include "mtjr/grad-check.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mtjr/error.h"

namespace mtjr {

GradCheckResult GradCheck(const std::function<Tensor(Tape &)> &f,
                          std::span<Tensor> inputs, double h) {
  if (!(h >= 1e-6 && h <= 1e-4))
    throw Error(ErrorCode::kInvalidArgument, "grad check step outside [1e-6, 1e-4]");
  for (Tensor &t : inputs) {
    t.SetRequiresGrad(true);
    t.ZeroGrad();
  }
  {
    Tape tape;
    Tensor loss = f(tape);
    tape.Backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  for (Tensor &t : inputs) {
    auto g = t.MutableGrad();
    analytic.emplace_back(g.begin(), g.end());
  }

  auto evaluate = [&f]() {
    Tape tape(false);
    return f(tape).Item();
  };

  GradCheckResult result;
  for (size_t k = 0; k < inputs.size(); ++k) {
    auto values = inputs[k].Values();
    for (size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double plus = evaluate();
      values[i] = saved - h;
      const double minus = evaluate();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++result.num_checked;
      if (rel > result.max_relative_error || !std::isfinite(rel)) {
        result.max_relative_error = std::isfinite(rel) ? rel : INFINITY;
        result.worst_input = k;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace mtjr
