// tests/decode-eval-test.cc

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "mtjr/accent-head.h"
#include "mtjr/decode.h"
#include "mtjr/error.h"
#include "mtjr/evaluate.h"
#include "mtjr/ops.h"
#include "mtjr/task.h"
#include "mtjr/transformer.h"
#include "oracles.h"
#include "test-util.h"

namespace mtjr {

using testing::RandomTensor;

namespace {

ModelConfig ToyConfig() {
  ModelConfig c;
  c.d_model = 8;
  c.heads = 2;
  c.enc_layers = 2;
  c.dec_layers = 1;
  c.ffn_dim = 12;
  c.dropout = 0.0;
  c.vocab_size = 9;  // blank, 4 tokens, sos/eos, 3 tags
  c.accent_count = 3;
  c.subsample_factor = 2;
  c.feature_dim = 5;
  return c;
}

std::vector<int32_t> RandomString(Rng &rng, int32_t max_len, int32_t alphabet) {
  std::vector<int32_t> s(rng.UniformInt(0, max_len));
  for (int32_t &x : s) x = static_cast<int32_t>(rng.UniformInt(1, alphabet));
  return s;
}

// Log probability of `tokens` followed (if ended) by eos, by direct teacher
// forcing, one decoder call per prefix.
double ScoreByTeacherForcing(const Model &model, const EncoderOutput &enc,
                             const std::vector<int32_t> &tokens, bool ended) {
  const int32_t eos = SosEosId(model.config());
  std::vector<int32_t> full = tokens;
  if (ended) full.push_back(eos);
  Tape tape(false);
  double total = 0.0;
  for (size_t k = 0; k < full.size(); ++k) {
    std::vector<int32_t> input = {eos};
    input.insert(input.end(), full.begin(), full.begin() + k);
    Tensor logits = model.DecodeLogits(tape, input, enc, {});
    Tensor lp = LogSoftmax(tape, SliceRows(tape, logits, logits.Dim(0) - 1, 1));
    total += lp.Value(full[k]);
  }
  return total;
}

}  // namespace

TEST_CASE("wer examples") {
  WerStats s = ComputeWer(std::vector<int32_t>{1, 2, 3}, std::vector<int32_t>{1, 3});
  CHECK(s.deletions == 1);
  CHECK(s.substitutions == 0);
  CHECK(s.insertions == 0);
  CHECK(s.wer == doctest::Approx(1.0 / 3.0));
  s = ComputeWer(std::vector<int32_t>{1}, std::vector<int32_t>{2});
  CHECK(s.substitutions == 1);
  CHECK(s.wer == 1.0);
  s = ComputeWer(std::vector<int32_t>{4, 4, 2}, std::vector<int32_t>{4, 4, 2});
  CHECK(s.Edits() == 0);
  CHECK(s.wer == 0.0);
  s = ComputeWer(std::vector<int32_t>{}, std::vector<int32_t>{});
  CHECK(s.wer == 0.0);
  CHECK_THROWS_AS(ComputeWer(std::vector<int32_t>{}, std::vector<int32_t>{1}), Error);
  s = ComputeWer(std::vector<int32_t>{1, 2}, std::vector<int32_t>{});
  CHECK(s.deletions == 2);
  CHECK(s.wer == 1.0);
}

TEST_CASE("wer matches exhaustive alignment") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<int32_t> ref = RandomString(rng, 8, 4);
    if (ref.empty()) ref.push_back(1);
    const std::vector<int32_t> hyp = RandomString(rng, 8, 4);
    const WerStats s = ComputeWer(ref, hyp);
    const int32_t oracle = oracle::MinEditsByEnumeration(ref, 0, hyp, 0);
    REQUIRE(s.Edits() == oracle);
    // Every alignment consumes both strings.
    CHECK(s.deletions - s.insertions ==
          static_cast<int64_t>(ref.size()) - static_cast<int64_t>(hyp.size()));
    CHECK(s.wer == doctest::Approx(static_cast<double>(oracle) / ref.size()));
    if (!hyp.empty()) CHECK(ComputeWer(hyp, ref).Edits() == s.Edits());
  }
}

TEST_CASE("pooled wer") {
  WerStats a = ComputeWer(std::vector<int32_t>{1, 2, 3, 4}, std::vector<int32_t>{1, 2, 3, 4});
  a.Add(ComputeWer(std::vector<int32_t>{1}, std::vector<int32_t>{2}));
  // 1 edit over 5 reference tokens, not the mean of 0 and 1.
  CHECK(a.wer == doctest::Approx(0.2));
}

TEST_CASE("ctc greedy matches the rule oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int32_t frames = static_cast<int32_t>(rng.UniformInt(1, 12));
    const int32_t vocab = static_cast<int32_t>(rng.UniformInt(2, 6));
    std::vector<double> v(static_cast<size_t>(frames) * vocab);
    // Coarse values make repeats, blanks and ties common.
    for (double &x : v) x = static_cast<double>(rng.UniformInt(0, 3));
    Tensor logits({frames, vocab}, v);
    REQUIRE(CtcGreedy(logits) == oracle::CtcGreedyRule(v, frames, vocab));
  }
  // Valid-frame limit.
  Tensor logits = Tensor::FromRows({{0, 5, 0}, {0, 0, 5}, {5, 0, 0}});
  CHECK(CtcGreedy(logits, 1) == std::vector<int32_t>{1});
  CHECK(CtcGreedy(Tensor::FromRows({{0, 5}, {0, 5}, {5, 0}, {0, 5}})) ==
        std::vector<int32_t>{1, 1});
}

TEST_CASE("beam search with a wide beam is exhaustive") {
  const ModelConfig cfg = ToyConfig();
  const int32_t eos = SosEosId(cfg);
  Rng rng(3);
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    Model model(cfg, seed);
    Tape tape(false);
    Tensor feats = RandomTensor({8, cfg.feature_dim}, rng, false);
    EncoderOutput enc = model.EncodeFeatures(tape, feats, 8, {});
    BeamOptions opts;
    opts.max_len_ratio = 2.0 / enc.NumValid();  // cap = 2
    opts.beam = 1000;

    // Every admissible outcome within two steps.
    struct Entry {
      std::vector<int32_t> tokens;
      bool ended;
      double score;
    };
    std::vector<Entry> all;
    all.push_back({{}, true, ScoreByTeacherForcing(model, enc, {}, true)});
    for (int32_t a = 1; a < eos; ++a) {
      all.push_back({{a}, true, ScoreByTeacherForcing(model, enc, {a}, true) / 2});
      for (int32_t b = 1; b < eos; ++b)
        all.push_back({{a, b}, false, ScoreByTeacherForcing(model, enc, {a, b}, false) / 2});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const Entry &x, const Entry &y) { return x.score > y.score; });

    const std::vector<Hypothesis> hyps = BeamSearch(model, enc, opts);
    REQUIRE(hyps.size() == all.size());
    for (size_t k = 0; k < hyps.size(); ++k) {
      CHECK(hyps[k].tokens == all[k].tokens);
      CHECK(hyps[k].ended == all[k].ended);
      CHECK(hyps[k].final_score == doctest::Approx(all[k].score).epsilon(1e-12));
    }

    // beam = V keeps everything that can still win at the cap.
    opts.beam = cfg.vocab_size;
    const std::vector<Hypothesis> narrow = BeamSearch(model, enc, opts);
    REQUIRE(!narrow.empty());
    CHECK(narrow.front().tokens == all.front().tokens);
    CHECK(narrow.front().ended == all.front().ended);
    CHECK(narrow.front().final_score == doctest::Approx(all.front().score).epsilon(1e-12));
  }
}

TEST_CASE("beam one is greedy decoding") {
  const ModelConfig cfg = ToyConfig();
  const int32_t eos = SosEosId(cfg);
  Rng rng(5);
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Model model(cfg, seed);
    Tape tape(false);
    Tensor feats = RandomTensor({12, cfg.feature_dim}, rng, false);
    EncoderOutput enc = model.EncodeFeatures(tape, feats, 12, {});
    BeamOptions opts;
    opts.beam = 1;
    const std::vector<Hypothesis> hyps = BeamSearch(model, enc, opts);
    REQUIRE(hyps.size() == 1);

    std::vector<int32_t> greedy;
    bool ended = false;
    const int32_t cap = enc.NumValid();
    while (static_cast<int32_t>(greedy.size()) < cap) {
      std::vector<int32_t> input = {eos};
      input.insert(input.end(), greedy.begin(), greedy.end());
      Tensor logits = model.DecodeLogits(tape, input, enc, {});
      const int32_t last = logits.Dim(0) - 1;
      int32_t best = 1;
      for (int32_t v = 2; v <= eos; ++v)
        if (logits.At(last, v) > logits.At(last, best)) best = v;
      if (best == eos) {
        ended = true;
        break;
      }
      greedy.push_back(best);
    }
    CHECK(hyps[0].tokens == greedy);
    CHECK(hyps[0].ended == ended);
  }
}

TEST_CASE("beam search option checks and tags") {
  const ModelConfig cfg = ToyConfig();
  Model model(cfg, 1);
  Rng rng(2);
  Tape tape(false);
  EncoderOutput enc = model.EncodeFeatures(tape, RandomTensor({6, 5}, rng, false), 6, {});
  BeamOptions opts;
  opts.beam = 0;
  CHECK_THROWS_AS(BeamSearch(model, enc, opts), Error);
  opts.beam = 4;
  opts.max_len_ratio = 0.0;
  CHECK_THROWS_AS(BeamSearch(model, enc, opts), Error);
  opts.max_len_ratio = 1.0;
  for (const Hypothesis &h : BeamSearch(model, enc, opts))
    for (int32_t t : h.tokens) {
      CHECK_FALSE(IsAccentTag(cfg, t));
      CHECK(t != kBlankId);
    }
  for (const Hypothesis &h : BeamSearch(model, enc, opts))
    CHECK(static_cast<int32_t>(h.tokens.size()) <= enc.NumValid());
}

TEST_CASE("joint rescoring") {
  auto hyp = [](std::vector<int32_t> t, double att) {
    Hypothesis h;
    h.tokens = std::move(t);
    h.ended = true;
    h.att_logprob = att;
    return h;
  };
  // CTC strongly prefers [2]; attention prefers [1].
  Tensor ctc = Tensor::FromRows({{0, 0, 6, 0, 0, 0}, {6, 0, 0, 0, 0, 0}});
  std::vector<Hypothesis> hyps = {hyp({1}, -0.5), hyp({2}, -1.0)};

  std::vector<Hypothesis> w0 = hyps;
  JointRescore(w0, ctc, 2, 0.0);
  CHECK(w0[0].tokens == std::vector<int32_t>{1});
  CHECK(w0[0].final_score == doctest::Approx(-0.25));
  REQUIRE(w0[0].ctc_logprob.has_value());

  std::vector<Hypothesis> w1 = hyps;
  JointRescore(w1, ctc, 2, 1.0);
  CHECK(w1[0].tokens == std::vector<int32_t>{2});
  CHECK(*w1[0].ctc_logprob > *w1[1].ctc_logprob);

  // Constructed flip at an intermediate weight.
  std::vector<Hypothesis> w3 = hyps;
  JointRescore(w3, ctc, 2, 0.3);
  const double a1 = 0.7 * -0.5 / 2 + 0.3 * *w1[1].ctc_logprob / 2;
  const double a2 = 0.7 * -1.0 / 2 + 0.3 * *w1[0].ctc_logprob / 2;
  CHECK(w3[0].tokens == (a2 > a1 ? std::vector<int32_t>{2} : std::vector<int32_t>{1}));
  CHECK(a2 > a1);

  // An alignment CTC cannot produce ranks last.
  std::vector<Hypothesis> inf = {hyp({1, 1, 1}, -0.01), hyp({2}, -3.0)};
  JointRescore(inf, ctc, 2, 0.3);
  CHECK(inf[0].tokens == std::vector<int32_t>{2});
  CHECK(std::isinf(inf[1].final_score));
  CHECK(inf[1].final_score < 0);

  CHECK_THROWS_AS(JointRescore(hyps, ctc, 2, 1.5), Error);
}

TEST_CASE("score length") {
  Hypothesis h;
  CHECK(ScoreLength(h) == 1);
  h.ended = true;
  CHECK(ScoreLength(h) == 1);
  h.tokens = {1, 2};
  CHECK(ScoreLength(h) == 3);
  h.ended = false;
  CHECK(ScoreLength(h) == 2);
}

TEST_CASE("accent tags") {
  const ModelConfig cfg = ToyConfig();
  const std::vector<int32_t> tokens = {1, 3, 2};
  CHECK(AsrTargets(cfg, TrainMode::kMtjr, TagPosition::kAppend, tokens, 1) == tokens);
  const std::vector<int32_t> app = AsrTargets(cfg, TrainMode::kStjr, TagPosition::kAppend, tokens, 2);
  CHECK(app == std::vector<int32_t>{1, 3, 2, AccentTagId(cfg, 2)});
  const std::vector<int32_t> pre = AsrTargets(cfg, TrainMode::kStjr, TagPosition::kPrepend, tokens, 0);
  CHECK(pre == std::vector<int32_t>{AccentTagId(cfg, 0), 1, 3, 2});
  CHECK_THROWS_AS(AsrTargets(cfg, TrainMode::kStjr, TagPosition::kAppend, tokens, 3), Error);

  TagExtraction e = ExtractAccentTag(cfg, app, TagPosition::kAppend);
  CHECK(e.transcript == tokens);
  CHECK(e.accent == 2);
  e = ExtractAccentTag(cfg, pre, TagPosition::kPrepend);
  CHECK(e.transcript == tokens);
  CHECK(e.accent == 0);
  e = ExtractAccentTag(cfg, tokens, TagPosition::kAppend);
  CHECK_FALSE(e.accent.has_value());
  // Two tags: the one nearest the configured end wins.
  const std::vector<int32_t> two = {AccentTagId(cfg, 0), 1, AccentTagId(cfg, 1)};
  CHECK(ExtractAccentTag(cfg, two, TagPosition::kAppend).accent == 1);
  CHECK(ExtractAccentTag(cfg, two, TagPosition::kPrepend).accent == 0);
  CHECK(ExtractAccentTag(cfg, two, TagPosition::kPrepend).transcript == std::vector<int32_t>{1});
}

TEST_CASE("evaluate aggregates per accent") {
  const ModelConfig cfg = ToyConfig();
  Model model(cfg, 4);
  Rng rng(8);
  Corpus corpus;
  for (int i = 0; i < 13; ++i) {
    Utterance u;
    u.utt_id = "u" + std::to_string(i);
    u.features = testing::RandomFeatures(static_cast<int32_t>(rng.UniformInt(4, 10)), 5, rng);
    u.tokens = RandomString(rng, 3, 4);
    if (u.tokens.empty()) u.tokens = {2};
    u.accent_id = i % 2;  // accent 2 never appears
    corpus.push_back(u);
  }
  EvalOptions opts;
  opts.threads = 1;
  opts.decode.beam = 2;
  opts.sharing.tap_layer = 2;
  const EvalResult r = Evaluate(model, corpus, opts);
  REQUIRE(r.wer.has_value());
  REQUIRE(r.accuracy.has_value());
  REQUIRE(r.per_accent_accuracy.size() == 3);
  CHECK_FALSE(r.per_accent_accuracy[2].has_value());
  CHECK(r.per_accent_count[0] == 7);
  CHECK(r.per_accent_count[1] == 6);
  const double pooled = (7 * *r.per_accent_accuracy[0] + 6 * *r.per_accent_accuracy[1]) / 13;
  CHECK(*r.accuracy == doctest::Approx(pooled).epsilon(1e-12));

  // Recount from per-utterance results.
  WerStats total;
  int correct = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    total.Add(ComputeWer(corpus[i].tokens, r.utterances[i].hypothesis));
    correct += r.utterances[i].predicted_accent == corpus[i].accent_id;
  }
  CHECK(*r.wer == doctest::Approx(total.wer).epsilon(1e-12));
  CHECK(*r.accuracy == doctest::Approx(correct / 13.0).epsilon(1e-12));

  // Thread count does not change results.
  opts.threads = 3;
  const EvalResult r3 = Evaluate(model, corpus, opts);
  CHECK(*r3.wer == *r.wer);
  CHECK(*r3.accuracy == *r.accuracy);

  opts.mode = TrainMode::kMonoAr;
  const EvalResult ar = Evaluate(model, corpus, opts);
  CHECK_FALSE(ar.wer.has_value());
  CHECK(*ar.accuracy == *r.accuracy);
  opts.mode = TrainMode::kMonoAsr;
  const EvalResult asr = Evaluate(model, corpus, opts);
  CHECK_FALSE(asr.accuracy.has_value());
  CHECK(*asr.wer == *r.wer);
}

}  // namespace mtjr
