// src/accent-head.cc

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

#include "mtjr/accent-head.h"

#include "mtjr/error.h"
#include "mtjr/ops.h"

namespace mtjr {

std::vector<double> PooledStats::Mean() const {
  auto v = concat.Values();
  return {v.begin(), v.begin() + dim};
}

std::vector<double> PooledStats::Variance() const {
  auto v = concat.Values();
  return {v.begin() + dim, v.begin() + 2 * dim};
}

PooledStats StatsPool(Tape &tape, const Tensor &hidden,
                      std::span<const uint8_t> mask) {
  if (hidden.NumDims() != 2)
    throw Error(ErrorCode::kShapeMismatch, "StatsPool expects [frames x dim]");
  const int32_t frames = hidden.Dim(0), dim = hidden.Dim(1);
  if (static_cast<int32_t>(mask.size()) != frames)
    throw Error(ErrorCode::kShapeMismatch, "StatsPool mask length");
  int32_t count = 0;
  for (uint8_t m : mask) count += m ? 1 : 0;
  if (count == 0)
    throw Error(ErrorCode::kEmptyUtterance, "every frame is masked");

  std::vector<double> out(2 * static_cast<size_t>(dim), 0.0);
  double *mean = out.data();
  double *var = out.data() + dim;
  for (int32_t t = 0; t < frames; ++t) {
    if (!mask[t]) continue;
    for (int32_t c = 0; c < dim; ++c) mean[c] += hidden.At(t, c);
  }
  for (int32_t c = 0; c < dim; ++c) mean[c] /= count;
  for (int32_t t = 0; t < frames; ++t) {
    if (!mask[t]) continue;
    for (int32_t c = 0; c < dim; ++c) {
      const double d = hidden.At(t, c) - mean[c];
      var[c] += d * d;
    }
  }
  for (int32_t c = 0; c < dim; ++c) var[c] /= count;

  PooledStats pooled;
  pooled.dim = dim;
  pooled.concat = Tensor({1, 2 * dim}, std::move(out));
  if (tape.ShouldRecord({&hidden})) {
    std::vector<uint8_t> keep(mask.begin(), mask.end());
    Tensor result = pooled.concat;
    tape.Record(result, [hidden, result, keep, count, frames, dim]() mutable {
      // d mean_c / d x_tc = 1/n; d var_c / d x_tc = 2 (x_tc - mean_c) / n.
      auto g = result.Grad();
      auto y = result.Values();
      auto gx = hidden.MutableGrad();
      for (int32_t t = 0; t < frames; ++t) {
        if (!keep[t]) continue;
        for (int32_t c = 0; c < dim; ++c) {
          const double centered = hidden.At(t, c) - y[c];
          gx[static_cast<size_t>(t) * dim + c] +=
              (g[c] + 2.0 * centered * g[dim + c]) / count;
        }
      }
    });
  }
  return pooled;
}

Tensor Classify(Tape &tape, const PooledStats &pooled, const Tensor &weight,
                const Tensor &bias) {
  return Linear(tape, pooled.concat, weight, bias);
}

Tensor AccentBranch(Tape &tape, const Model &model,
                    const EncoderOutput &encoded,
                    const SharingConfig &sharing) {
  sharing.Check(model.config());
  if (static_cast<int32_t>(encoded.layers.size()) < sharing.tap_layer)
    throw Error(ErrorCode::kInvalidArgument, "encoder output lacks the tap layer");
  PooledStats pooled =
      StatsPool(tape, encoded.Layer(sharing.tap_layer), encoded.mask);
  return Classify(tape, pooled, model.params().Get("accent_head.weight"),
                  model.params().Get("accent_head.bias"));
}

}  // namespace mtjr
