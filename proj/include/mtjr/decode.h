// mtjr/decode.h

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

#ifndef MTJR_DECODE_H_
#define MTJR_DECODE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mtjr/tensor.h"
#include "mtjr/transformer.h"

namespace mtjr {

struct Hypothesis {
  std::vector<int32_t> tokens;  // no sos; stops before eos
  bool ended = false;           // true when the decoder emitted eos
  double att_logprob = 0.0;     // includes the eos step when ended
  std::optional<double> ctc_logprob;
  std::optional<int32_t> accent_tag;  // STJR only
  double final_score = 0.0;
};

// Number of scored decoder steps: tokens plus the eos step, at least 1.
int32_t ScoreLength(const Hypothesis &hyp);

// Frame-wise argmax (ties to the lower id), merge repeats, drop blanks.
std::vector<int32_t> CtcGreedy(const Tensor &logits, int32_t num_frames = -1);

struct BeamOptions {
  int32_t beam = 10;
  // Length cap = ceil(max_len_ratio * valid encoder frames), at least 1.
  double max_len_ratio = 1.0;
  bool allow_accent_tags = false;
};

// Attention beam search. At each step every live hypothesis is extended by
// every admissible token, and the best `beam` extensions survive (ties go to
// the lexicographically smaller token sequence). Extensions by eos end a
// hypothesis; hypotheses still live at the cap end there. The result holds
// every ended hypothesis ranked by att_logprob / ScoreLength, best first.
std::vector<Hypothesis> BeamSearch(const Model &model,
                                   const EncoderOutput &encoded,
                                   const BeamOptions &options);

// final = (1 - w) * att / len + w * ctc / len with ctc = -CTC loss of the
// hypothesis on `ctc_logits`; hypotheses CTC cannot align score -inf.
// Stable re-sort, best first.
void JointRescore(std::vector<Hypothesis> &hyps, const Tensor &ctc_logits,
                  int32_t num_frames, double ctc_weight);

}  // namespace mtjr

#endif  // MTJR_DECODE_H_
