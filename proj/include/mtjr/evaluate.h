// mtjr/evaluate.h

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

#ifndef MTJR_EVALUATE_H_
#define MTJR_EVALUATE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtjr/corpus.h"
#include "mtjr/decode.h"
#include "mtjr/task.h"
#include "mtjr/transformer.h"

namespace mtjr {

struct WerStats {
  int64_t substitutions = 0;
  int64_t insertions = 0;
  int64_t deletions = 0;
  int64_t reference_length = 0;
  double wer = 0.0;

  int64_t Edits() const { return substitutions + insertions + deletions; }
  // Pools counts; wer is recomputed from the pooled totals.
  void Add(const WerStats &other);
};

// Unit-cost Levenshtein alignment. When several minimal alignments exist the
// backtrace prefers substitution (or match), then insertion, then deletion.
// Both sequences empty gives wer 0; an empty reference with a nonempty
// hypothesis throws EmptyReference.
WerStats ComputeWer(std::span<const int32_t> ref, std::span<const int32_t> hyp);

struct DecodeOptions {
  int32_t beam = 10;
  double max_len_ratio = 1.0;
  double ctc_weight = 0.3;
};

struct EvalOptions {
  TrainMode mode = TrainMode::kMtjr;
  SharingConfig sharing;
  TagPosition tag_position = TagPosition::kAppend;
  DecodeOptions decode;
  // 0 = MTJR_THREADS or the hardware concurrency.
  int32_t threads = 0;
};

struct UtteranceResult {
  std::vector<int32_t> hypothesis;  // transcript, tags removed
  std::optional<int32_t> predicted_accent;
};

struct EvalResult {
  std::optional<double> wer;       // absent for mono_ar
  std::optional<double> accuracy;  // absent for mono_asr
  // One entry per accent; absent where the accent has no utterances or the
  // mode has no accent output.
  std::vector<std::optional<double>> per_accent_accuracy;
  std::vector<int64_t> per_accent_count;
  WerStats wer_totals;
  int64_t excluded_empty_references = 0;
  std::vector<UtteranceResult> utterances;
};

// Decodes one utterance: beam search + CTC rescoring for the transcript,
// the accent head argmax (mtjr, mono_ar) or the extracted tag (stjr).
UtteranceResult RecognizeUtterance(const Model &model, const Utterance &utt,
                                   const EvalOptions &options);

// Corpus-level WER from pooled edit counts, and overall/per-accent accuracy.
// For stjr a hypothesis without a tag counts as a wrong accent.
EvalResult Evaluate(const Model &model, std::span<const Utterance> corpus,
                    const EvalOptions &options);

// Worker-thread cap: MTJR_THREADS if set and positive, else the hardware
// concurrency (at least 1).
int32_t WorkerThreads();

}  // namespace mtjr

#endif  // MTJR_EVALUATE_H_
