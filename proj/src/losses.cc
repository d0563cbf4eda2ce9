// src/losses.cc

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

#include "mtjr/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mtjr/error.h"
#include "mtjr/ops.h"
#include "mtjr/transformer.h"

namespace mtjr {

namespace {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline double LogAdd(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

LossConfig LossConfig::Convex(double lambda, double gamma) {
  LossConfig c;
  c.beta = 1.0 - lambda;
  c.lambda = lambda;
  c.gamma = gamma;
  return c;
}

void LossConfig::Check() const {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw Error(ErrorCode::kConfig, "gamma must be in [0, 1]");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::kConfig, "lambda must be >= 0");
  if (!(beta > 0.0)) throw Error(ErrorCode::kConfig, "beta must be > 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
    throw Error(ErrorCode::kConfig, "label_smoothing must be in [0, 1)");
}

int32_t CtcMinFrames(std::span<const int32_t> target) {
  int32_t n = static_cast<int32_t>(target.size());
  for (size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++n;
  return n;
}

Tensor CtcLossFromLogProbs(Tape &tape, const Tensor &log_probs,
                           std::span<const int32_t> target,
                           int32_t num_frames) {
  if (log_probs.NumDims() != 2)
    throw Error(ErrorCode::kShapeMismatch, "CTC expects [frames x vocab]");
  const int32_t vocab = log_probs.Dim(1);
  const int32_t frames = num_frames < 0 ? log_probs.Dim(0) : num_frames;
  if (frames > log_probs.Dim(0))
    throw Error(ErrorCode::kInvalidArgument, "num_frames exceeds rows");
  for (int32_t label : target) {
    if (label == kBlankId)
      throw Error(ErrorCode::kBlankInTarget, "blank id inside CTC target");
    if (label < 0 || label >= vocab)
      throw Error(ErrorCode::kLabelOutOfRange, "CTC label outside vocabulary");
  }
  const int32_t need = CtcMinFrames(target);
  if (frames < std::max(need, 1))
    throw Error(ErrorCode::kInfeasibleAlignment,
                std::to_string(frames) + " frames cannot carry a target needing " +
                    std::to_string(need));

  // Blank-interleaved target: b l1 b l2 ... lL b.
  const int32_t states = 2 * static_cast<int32_t>(target.size()) + 1;
  std::vector<int32_t> ext(states, kBlankId);
  for (size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  auto lp = [&](int32_t t, int32_t s) {
    return log_probs.Value(static_cast<size_t>(t) * vocab + ext[s]);
  };
  // Skip transition s-2 -> s is allowed into a label that differs from the
  // label two states back.
  auto can_skip = [&](int32_t s) {
    return s >= 2 && ext[s] != kBlankId && ext[s] != ext[s - 2];
  };

  auto alpha = std::make_shared<std::vector<double>>(
      static_cast<size_t>(frames) * states, kLogZero);
  auto A = [&](int32_t t, int32_t s) -> double & {
    return (*alpha)[static_cast<size_t>(t) * states + s];
  };
  A(0, 0) = lp(0, 0);
  if (states > 1) A(0, 1) = lp(0, 1);
  for (int32_t t = 1; t < frames; ++t) {
    for (int32_t s = 0; s < states; ++s) {
      double acc = A(t - 1, s);
      if (s >= 1) acc = LogAdd(acc, A(t - 1, s - 1));
      if (can_skip(s)) acc = LogAdd(acc, A(t - 1, s - 2));
      A(t, s) = acc == kLogZero ? kLogZero : acc + lp(t, s);
    }
  }
  double log_like = A(frames - 1, states - 1);
  if (states > 1) log_like = LogAdd(log_like, A(frames - 1, states - 2));

  Tensor out = Tensor::Scalar(-log_like);
  if (tape.ShouldRecord({&log_probs})) {
    std::vector<int32_t> ext_copy = ext;
    tape.Record(out, [log_probs, out, alpha, ext_copy, frames, states, vocab,
                      log_like]() mutable {
      const double g = out.Grad()[0];
      auto lpv = [&](int32_t t, int32_t s) {
        return log_probs.Value(static_cast<size_t>(t) * vocab + ext_copy[s]);
      };
      auto skip = [&](int32_t s) {
        return s >= 2 && ext_copy[s] != kBlankId && ext_copy[s] != ext_copy[s - 2];
      };
      // beta(t, s): log prob of emitting the suffix from (t, s) onward,
      // including the emission at t.
      std::vector<double> beta(static_cast<size_t>(frames) * states, kLogZero);
      auto B = [&](int32_t t, int32_t s) -> double & {
        return beta[static_cast<size_t>(t) * states + s];
      };
      B(frames - 1, states - 1) = lpv(frames - 1, states - 1);
      if (states > 1) B(frames - 1, states - 2) = lpv(frames - 1, states - 2);
      for (int32_t t = frames - 2; t >= 0; --t) {
        for (int32_t s = 0; s < states; ++s) {
          double acc = B(t + 1, s);
          if (s + 1 < states) acc = LogAdd(acc, B(t + 1, s + 1));
          if (s + 2 < states && skip(s + 2)) acc = LogAdd(acc, B(t + 1, s + 2));
          B(t, s) = acc == kLogZero ? kLogZero : acc + lpv(t, s);
        }
      }
      auto grad = log_probs.MutableGrad();
      for (int32_t t = 0; t < frames; ++t) {
        for (int32_t s = 0; s < states; ++s) {
          const double a = (*alpha)[static_cast<size_t>(t) * states + s];
          const double b = B(t, s);
          if (a == kLogZero || b == kLogZero) continue;
          // Occupancy of state s at frame t; the emission appears in both
          // alpha and beta, so subtract it once.
          const double occ = std::exp(a + b - lpv(t, s) - log_like);
          grad[static_cast<size_t>(t) * vocab + ext_copy[s]] -= g * occ;
        }
      }
    });
  }
  return out;
}

Tensor CtcLoss(Tape &tape, const Tensor &logits,
               std::span<const int32_t> target, int32_t num_frames) {
  return CtcLossFromLogProbs(tape, LogSoftmax(tape, logits), target, num_frames);
}

Tensor AttentionCe(Tape &tape, const Tensor &logits,
                   std::span<const int32_t> target, double label_smoothing) {
  if (logits.NumDims() != 2)
    throw Error(ErrorCode::kShapeMismatch, "attention CE expects [L x V]");
  const int32_t len = logits.Dim(0), vocab = logits.Dim(1);
  if (static_cast<int32_t>(target.size()) != len)
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(target.size()) + " targets for " +
                    std::to_string(len) + " positions");
  if (len == 0) throw Error(ErrorCode::kEmptySequence, "no positions");
  for (int32_t y : target)
    if (y < 0 || y >= vocab)
      throw Error(ErrorCode::kLabelOutOfRange, "target outside vocabulary");
  Tensor lp = LogSoftmax(tape, logits);
  const double eps = label_smoothing;
  double loss = 0.0;
  for (int32_t i = 0; i < len; ++i) {
    double mean_nll = 0.0;
    for (int32_t v = 0; v < vocab; ++v) mean_nll -= lp.At(i, v);
    mean_nll /= vocab;
    loss += (1.0 - eps) * -lp.At(i, target[i]) + eps * mean_nll;
  }
  loss /= len;
  Tensor out = Tensor::Scalar(loss);
  if (tape.ShouldRecord({&lp})) {
    std::vector<int32_t> tgt(target.begin(), target.end());
    tape.Record(out, [lp, out, tgt, len, vocab, eps]() mutable {
      const double g = out.Grad()[0] / len;
      auto grad = lp.MutableGrad();
      for (int32_t i = 0; i < len; ++i) {
        for (int32_t v = 0; v < vocab; ++v)
          grad[static_cast<size_t>(i) * vocab + v] -= g * eps / vocab;
        grad[static_cast<size_t>(i) * vocab + tgt[i]] -= g * (1.0 - eps);
      }
    });
  }
  return out;
}

Tensor AccentCe(Tape &tape, const Tensor &logits, int32_t label) {
  const int32_t classes = static_cast<int32_t>(logits.Size());
  if (label < 0 || label >= classes)
    throw Error(ErrorCode::kLabelOutOfRange,
                "accent label " + std::to_string(label) + " outside [0, " +
                    std::to_string(classes) + ")");
  Tensor row = logits.NumDims() == 2 ? logits : Reshape(tape, logits, {1, classes});
  Tensor lp = LogSoftmax(tape, row);
  Tensor out = Tensor::Scalar(-lp.Value(label));
  if (tape.ShouldRecord({&lp})) {
    tape.Record(out, [lp, out, label]() mutable {
      lp.MutableGrad()[label] -= out.Grad()[0];
    });
  }
  return out;
}

LossBreakdown Combine(double ctc, double att, double accent,
                      const LossConfig &config) {
  if (!std::isfinite(ctc) || !std::isfinite(att) || !std::isfinite(accent))
    throw Error(ErrorCode::kNonFinite, "non-finite loss component");
  LossBreakdown b;
  b.ctc = ctc;
  b.att = att;
  b.accent = accent;
  b.asr = config.gamma * ctc + (1.0 - config.gamma) * att;
  b.total = config.beta * b.asr + config.lambda * accent;
  return b;
}

Tensor CombineOnTape(Tape &tape, const Tensor &ctc, const Tensor &att,
                     const Tensor &accent, const LossConfig &config) {
  const double wc = config.beta * config.gamma;
  const double wa = config.beta * (1.0 - config.gamma);
  if (!accent.Defined()) {
    const Tensor terms[] = {ctc, att};
    const double weights[] = {wc, wa};
    return WeightedSum(tape, terms, weights);
  }
  const Tensor terms[] = {ctc, att, accent};
  const double weights[] = {wc, wa, config.lambda};
  return WeightedSum(tape, terms, weights);
}

}  // namespace mtjr
