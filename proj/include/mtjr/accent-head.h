// mtjr/accent-head.h

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

#ifndef MTJR_ACCENT_HEAD_H_
#define MTJR_ACCENT_HEAD_H_

#include <span>
#include <vector>

#include "mtjr/tensor.h"
#include "mtjr/transformer.h"

namespace mtjr {

// Per-dimension mean and population variance over the unmasked frames,
// concatenated as [mean | variance].
struct PooledStats {
  Tensor concat;  // [1 x 2*dim]
  int32_t dim = 0;
  std::vector<double> Mean() const;
  std::vector<double> Variance() const;
};

PooledStats StatsPool(Tape &tape, const Tensor &hidden,
                      std::span<const uint8_t> mask);

// Linear map from pooled statistics to accent logits [1 x accent_count].
// No softmax here; the loss and the argmax decision apply it.
Tensor Classify(Tape &tape, const PooledStats &pooled, const Tensor &weight,
                const Tensor &bias);

// classify(stats_pool(hidden at the tap layer)). `encoded` needs at least
// tap_layer layers.
Tensor AccentBranch(Tape &tape, const Model &model,
                    const EncoderOutput &encoded, const SharingConfig &sharing);

}  // namespace mtjr

#endif  // MTJR_ACCENT_HEAD_H_
