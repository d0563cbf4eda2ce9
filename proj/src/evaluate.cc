// src/evaluate.cc

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

#include "mtjr/evaluate.h"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "mtjr/accent-head.h"
#include "mtjr/error.h"

namespace mtjr {

void WerStats::Add(const WerStats &other) {
  substitutions += other.substitutions;
  insertions += other.insertions;
  deletions += other.deletions;
  reference_length += other.reference_length;
  wer = reference_length > 0
            ? static_cast<double>(Edits()) / static_cast<double>(reference_length)
            : 0.0;
}

WerStats ComputeWer(std::span<const int32_t> ref, std::span<const int32_t> hyp) {
  const size_t m = ref.size(), n = hyp.size();
  if (m == 0 && n > 0)
    throw Error(ErrorCode::kEmptyReference, "WER undefined for an empty reference");
  // cost[i][j]: edits turning ref[0..i) into hyp[0..j).
  std::vector<int32_t> cost((m + 1) * (n + 1));
  auto C = [&](size_t i, size_t j) -> int32_t & { return cost[i * (n + 1) + j]; };
  for (size_t i = 0; i <= m; ++i) C(i, 0) = static_cast<int32_t>(i);
  for (size_t j = 0; j <= n; ++j) C(0, j) = static_cast<int32_t>(j);
  for (size_t i = 1; i <= m; ++i)
    for (size_t j = 1; j <= n; ++j)
      C(i, j) = std::min({C(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                          C(i, j - 1) + 1, C(i - 1, j) + 1});

  WerStats s;
  s.reference_length = static_cast<int64_t>(m);
  size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        C(i, j) == C(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] != hyp[j - 1]) ++s.substitutions;
      --i;
      --j;
    } else if (j > 0 && C(i, j) == C(i, j - 1) + 1) {
      ++s.insertions;
      --j;
    } else {
      ++s.deletions;
      --i;
    }
  }
  s.wer = m > 0 ? static_cast<double>(s.Edits()) / static_cast<double>(m) : 0.0;
  return s;
}

int32_t WorkerThreads() {
  if (const char *env = std::getenv("MTJR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

UtteranceResult RecognizeUtterance(const Model &model, const Utterance &utt,
                                   const EvalOptions &options) {
  const ModelConfig &cfg = model.config();
  Tape tape(false);
  ForwardOptions fwd;
  Tensor feats({utt.features.rows, utt.features.cols},
               std::vector<double>(utt.features.data.begin(), utt.features.data.end()));
  const int32_t depth =
      options.mode == TrainMode::kMonoAr ? options.sharing.tap_layer : 0;
  EncoderOutput enc = model.EncodeFeatures(tape, feats, utt.features.rows, fwd, depth);

  UtteranceResult r;
  if (ModeHasAsr(options.mode)) {
    BeamOptions beam;
    beam.beam = options.decode.beam;
    beam.max_len_ratio = options.decode.max_len_ratio;
    beam.allow_accent_tags = options.mode == TrainMode::kStjr;
    std::vector<Hypothesis> hyps = BeamSearch(model, enc, beam);
    if (options.decode.ctc_weight > 0.0)
      JointRescore(hyps, model.CtcLogits(tape, enc), enc.NumValid(),
                   options.decode.ctc_weight);
    const std::vector<int32_t> best = hyps.empty() ? std::vector<int32_t>{} : hyps[0].tokens;
    if (options.mode == TrainMode::kStjr) {
      TagExtraction ex = ExtractAccentTag(cfg, best, options.tag_position);
      r.hypothesis = std::move(ex.transcript);
      r.predicted_accent = ex.accent;
    } else {
      r.hypothesis = best;
    }
  }
  if (ModeHasAccentHead(options.mode)) {
    Tensor logits = AccentBranch(tape, model, enc, options.sharing);
    int32_t best = 0;
    for (int32_t a = 1; a < static_cast<int32_t>(logits.Size()); ++a)
      if (logits.Value(a) > logits.Value(best)) best = a;
    r.predicted_accent = best;
  }
  return r;
}

EvalResult Evaluate(const Model &model, std::span<const Utterance> corpus,
                    const EvalOptions &options) {
  options.sharing.Check(model.config());
  const size_t n = corpus.size();
  EvalResult result;
  result.utterances.resize(n);
  const int32_t threads = std::max<int32_t>(
      1, std::min<int64_t>(options.threads > 0 ? options.threads : WorkerThreads(),
                           static_cast<int64_t>(n)));
  auto work = [&](int32_t worker) {
    for (size_t i = worker; i < n; i += threads)
      result.utterances[i] = RecognizeUtterance(model, corpus[i], options);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int32_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto &t : pool) t.join();
  }

  const int32_t accents = model.config().accent_count;
  std::vector<int64_t> correct(accents, 0);
  result.per_accent_count.assign(accents, 0);
  int64_t total_correct = 0;
  for (size_t i = 0; i < n; ++i) {
    const Utterance &u = corpus[i];
    const UtteranceResult &r = result.utterances[i];
    if (ModeHasAsr(options.mode)) {
      if (u.tokens.empty()) {
        // Empty references are left out of the pooled WER.
        ++result.excluded_empty_references;
      } else {
        result.wer_totals.Add(ComputeWer(u.tokens, r.hypothesis));
      }
    }
    if (u.accent_id >= 0 && u.accent_id < accents) {
      ++result.per_accent_count[u.accent_id];
      if (r.predicted_accent && *r.predicted_accent == u.accent_id) {
        ++correct[u.accent_id];
        ++total_correct;
      }
    }
  }
  if (ModeHasAsr(options.mode)) result.wer = result.wer_totals.wer;
  result.per_accent_accuracy.assign(accents, std::nullopt);
  if (ModeHasAccent(options.mode) && n > 0) {
    result.accuracy = static_cast<double>(total_correct) / static_cast<double>(n);
    for (int32_t a = 0; a < accents; ++a)
      if (result.per_accent_count[a] > 0)
        result.per_accent_accuracy[a] =
            static_cast<double>(correct[a]) / static_cast<double>(result.per_accent_count[a]);
  }
  return result;
}

}  // namespace mtjr
