// mtjr/losses.h

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

#ifndef MTJR_LOSSES_H_
#define MTJR_LOSSES_H_

#include <cstdint>
#include <span>

#include "mtjr/tensor.h"

namespace mtjr {

// Weights of the joint objective
//   total = beta * asr + lambda * accent,  asr = gamma * ctc + (1-gamma) * att.
// beta = 1 is the usual setting (only lambda is tuned); set beta = 1 - lambda
// for the convex-combination form.
struct LossConfig {
  double beta = 1.0;
  double lambda = 0.1;
  double gamma = 0.3;
  double label_smoothing = 0.1;

  static LossConfig Convex(double lambda, double gamma = 0.3);
  void Check() const;
};

struct LossBreakdown {
  double ctc = 0.0;
  double att = 0.0;
  double asr = 0.0;
  double accent = 0.0;
  double total = 0.0;
};

// Smallest number of frames that can carry `target`: one per label plus a
// separating blank between equal neighbours.
int32_t CtcMinFrames(std::span<const int32_t> target);

// -log p(target | logits) for logits [T x V], blank = 0, summed over all
// blank-augmented alignments with a log-space forward pass. Only the first
// `num_frames` rows are used (-1 = all). The gradient comes from the matching
// backward pass. Throws BlankInTarget or InfeasibleAlignment.
Tensor CtcLoss(Tape &tape, const Tensor &logits,
               std::span<const int32_t> target, int32_t num_frames = -1);

// Same quantity taking log-probabilities directly.
Tensor CtcLossFromLogProbs(Tape &tape, const Tensor &log_probs,
                           std::span<const int32_t> target,
                           int32_t num_frames = -1);

// Mean over positions of (1-eps) * NLL(target) + eps * mean_v NLL(v).
Tensor AttentionCe(Tape &tape, const Tensor &logits,
                   std::span<const int32_t> target, double label_smoothing);

// Softmax cross-entropy of a single accent label; logits [1 x A] or [A].
Tensor AccentCe(Tape &tape, const Tensor &logits, int32_t label);

// Plain-number combination. Throws NonFinite on any non-finite component.
LossBreakdown Combine(double ctc, double att, double accent,
                      const LossConfig &config);

// The same combination on the tape; returns the scalar that drives
// backward. An undefined `accent` drops the accent term (ASR only).
Tensor CombineOnTape(Tape &tape, const Tensor &ctc, const Tensor &att,
                     const Tensor &accent, const LossConfig &config);

}  // namespace mtjr

#endif  // MTJR_LOSSES_H_
