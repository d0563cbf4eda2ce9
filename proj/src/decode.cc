// src/decode.cc

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

#include "mtjr/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtjr/error.h"
#include "mtjr/losses.h"
#include "mtjr/ops.h"

namespace mtjr {

int32_t ScoreLength(const Hypothesis &hyp) {
  return std::max<int32_t>(
      1, static_cast<int32_t>(hyp.tokens.size()) + (hyp.ended ? 1 : 0));
}

std::vector<int32_t> CtcGreedy(const Tensor &logits, int32_t num_frames) {
  const int32_t frames = num_frames < 0 ? logits.NumRows() : num_frames;
  const int32_t vocab = logits.NumCols();
  std::vector<int32_t> out;
  int32_t prev = -1;
  for (int32_t t = 0; t < frames; ++t) {
    int32_t best = 0;
    for (int32_t v = 1; v < vocab; ++v)
      if (logits.At(t, v) > logits.At(t, best)) best = v;
    if (best != prev && best != kBlankId) out.push_back(best);
    prev = best;
  }
  return out;
}

namespace {

struct Candidate {
  std::vector<int32_t> tokens;
  bool ended;
  double logprob;
};

// Sort key for hypotheses with equal scores: token sequence, with an ended
// hypothesis ordered as if eos were appended.
std::vector<int32_t> TieKey(const std::vector<int32_t> &tokens, bool ended,
                            int32_t eos) {
  std::vector<int32_t> key = tokens;
  if (ended) key.push_back(eos);
  return key;
}

}  // namespace

std::vector<Hypothesis> BeamSearch(const Model &model,
                                   const EncoderOutput &encoded,
                                   const BeamOptions &options) {
  if (options.beam < 1) throw Error(ErrorCode::kInvalidArgument, "beam must be >= 1");
  if (!(options.max_len_ratio > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "max_len_ratio must be positive");
  const ModelConfig &cfg = model.config();
  const int32_t eos = SosEosId(cfg);
  const int32_t cap = std::max<int32_t>(
      1, static_cast<int32_t>(std::ceil(options.max_len_ratio * encoded.NumValid())));

  std::vector<Candidate> live = {{{}, false, 0.0}};
  std::vector<Candidate> finished;
  Tape tape(false);
  ForwardOptions fwd;
  for (int32_t step = 1; step <= cap && !live.empty(); ++step) {
    std::vector<Candidate> cands;
    for (const Candidate &h : live) {
      std::vector<int32_t> input = {eos};
      input.insert(input.end(), h.tokens.begin(), h.tokens.end());
      Tensor logits = model.DecodeLogits(tape, input, encoded, fwd);
      Tensor last = SliceRows(tape, logits, logits.Dim(0) - 1, 1);
      Tensor lp = LogSoftmax(tape, last);
      for (int32_t v = 1; v < cfg.vocab_size; ++v) {
        if (IsAccentTag(cfg, v) && !options.allow_accent_tags) continue;
        Candidate c{h.tokens, v == eos, h.logprob + lp.Value(v)};
        if (!c.ended) c.tokens.push_back(v);
        cands.push_back(std::move(c));
      }
    }
    // Every candidate at this step has the same length, so raw log
    // probability orders them the same way the normalized score does.
    const size_t keep = std::min<size_t>(options.beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                      [eos](const Candidate &a, const Candidate &b) {
                        if (a.logprob != b.logprob) return a.logprob > b.logprob;
                        return TieKey(a.tokens, a.ended, eos) <
                               TieKey(b.tokens, b.ended, eos);
                      });
    cands.resize(keep);
    live.clear();
    for (Candidate &c : cands) {
      if (c.ended || step == cap) finished.push_back(std::move(c));
      else live.push_back(std::move(c));
    }
  }

  std::vector<Hypothesis> hyps;
  hyps.reserve(finished.size());
  for (Candidate &c : finished) {
    Hypothesis h;
    h.tokens = std::move(c.tokens);
    h.ended = c.ended;
    h.att_logprob = c.logprob;
    h.final_score = h.att_logprob / ScoreLength(h);
    hyps.push_back(std::move(h));
  }
  std::sort(hyps.begin(), hyps.end(), [eos](const Hypothesis &a, const Hypothesis &b) {
    if (a.final_score != b.final_score) return a.final_score > b.final_score;
    return TieKey(a.tokens, a.ended, eos) < TieKey(b.tokens, b.ended, eos);
  });
  return hyps;
}

void JointRescore(std::vector<Hypothesis> &hyps, const Tensor &ctc_logits,
                  int32_t num_frames, double ctc_weight) {
  if (!(ctc_weight >= 0.0 && ctc_weight <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "ctc weight must be in [0, 1]");
  Tape tape(false);
  Tensor log_probs = LogSoftmax(tape, ctc_logits);
  for (Hypothesis &h : hyps) {
    try {
      h.ctc_logprob = -CtcLossFromLogProbs(tape, log_probs, h.tokens, num_frames).Item();
    } catch (const Error &e) {
      if (e.code() != ErrorCode::kInfeasibleAlignment) throw;
      h.ctc_logprob = -std::numeric_limits<double>::infinity();
    }
    const double len = ScoreLength(h);
    double score = (1.0 - ctc_weight) * h.att_logprob / len;
    if (ctc_weight > 0.0) score += ctc_weight * *h.ctc_logprob / len;
    h.final_score = score;
  }
  std::stable_sort(hyps.begin(), hyps.end(),
                   [](const Hypothesis &a, const Hypothesis &b) {
                     return a.final_score > b.final_score;
                   });
}

}  // namespace mtjr
