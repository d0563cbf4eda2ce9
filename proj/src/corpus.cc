// src/corpus.cc

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

#include "mtjr/corpus.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "mtjr/error.h"

namespace mtjr {

namespace {

enum Stream : uint64_t {
  kPrototypeStream = 11,
  kColoringStream = 12,
  kUtteranceStream = 13,
};

constexpr double kMaxConditionNumber = 100.0;

}  // namespace

const char *SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
    case Split::kOutDomain: return "outdomain";
  }
  return "unknown";
}

Split SplitFromName(const std::string &name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  if (name == "outdomain") return Split::kOutDomain;
  throw Error(ErrorCode::kConfig, "unknown split " + name);
}

const std::vector<std::string> &DefaultAccentNames() {
  static const std::vector<std::string> names = {"US",  "UK", "CHN", "IND",
                                                 "JPN", "KR", "PT",  "RU"};
  return names;
}

std::string AccentName(int32_t accent) {
  const auto &names = DefaultAccentNames();
  if (accent >= 0 && accent < static_cast<int32_t>(names.size()))
    return names[accent];
  return "A" + std::to_string(accent);
}

void SyntheticCorpusSpec::Check() const {
  auto fail = [](const std::string &m) { throw Error(ErrorCode::kConfig, m); };
  if (vocab < 2) fail("vocab must be >= 2");
  if (accent_count < 2) fail("accent_count must be >= 2");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  if (frames_per_token < 1) fail("frames_per_token must be >= 1");
  if (min_tokens < 1 || max_tokens < min_tokens) fail("bad utterance_length range");
  if (!(noise_std >= 0.0) || !(prototype_std >= 0.0)) fail("negative std");
  if (!(accent_strength >= 0.0) || !(outdomain_accent_strength >= 0.0) ||
      !(accent_bias_std >= 0.0))
    fail("negative accent coloring parameter");
  if (train_size < 0 || dev_size < 0 || test_size < 0 || outdomain_size < 0)
    fail("negative split size");
}

int32_t SyntheticCorpusSpec::SplitSize(Split split) const {
  switch (split) {
    case Split::kTrain: return train_size;
    case Split::kDev: return dev_size;
    case Split::kTest: return test_size;
    case Split::kOutDomain: return outdomain_size;
  }
  return 0;
}

std::vector<std::vector<double>> TokenPrototypes(const SyntheticCorpusSpec &spec) {
  Rng rng(SplitSeed(spec.seed, {kPrototypeStream}));
  const size_t block = static_cast<size_t>(spec.frames_per_token) * spec.feature_dim;
  std::vector<std::vector<double>> protos(spec.vocab, std::vector<double>(block));
  for (auto &p : protos)
    for (double &x : p) x = spec.prototype_std * rng.Normal();
  return protos;
}

std::vector<AccentColoring> AccentColorings(const SyntheticCorpusSpec &spec,
                                            double strength) {
  const int32_t d = spec.feature_dim;
  std::vector<AccentColoring> out(spec.accent_count);
  for (int32_t a = 0; a < spec.accent_count; ++a) {
    // Redraw (from the same stream) until well conditioned.
    Rng rng(SplitSeed(spec.seed, {kColoringStream, static_cast<uint64_t>(a)}));
    for (int attempt = 0;; ++attempt) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
      for (int32_t r = 0; r < d; ++r)
        for (int32_t c = 0; c < d; ++c) m(r, c) += strength * rng.Normal();
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
      const auto &sv = svd.singularValues();
      const double cond = sv(0) / sv(d - 1);
      if (std::isfinite(cond) && cond < kMaxConditionNumber) {
        out[a].condition_number = cond;
        out[a].transform.resize(static_cast<size_t>(d) * d);
        for (int32_t r = 0; r < d; ++r)
          for (int32_t c = 0; c < d; ++c)
            out[a].transform[static_cast<size_t>(r) * d + c] = m(r, c);
        break;
      }
      if (attempt > 100)
        throw Error(ErrorCode::kConfig, "cannot draw a well-conditioned accent coloring");
    }
    out[a].bias.resize(d);
    for (double &b : out[a].bias) b = spec.accent_bias_std * rng.Normal();
  }
  return out;
}

Corpus GenerateCorpus(const SyntheticCorpusSpec &spec, Split split) {
  spec.Check();
  const int32_t d = spec.feature_dim;
  const auto protos = TokenPrototypes(spec);
  const double strength = split == Split::kOutDomain
                              ? spec.outdomain_accent_strength
                              : spec.accent_strength;
  const auto colorings = AccentColorings(spec, strength);
  const int32_t n = spec.SplitSize(split);
  Corpus corpus;
  corpus.reserve(n);
  std::vector<double> frame(d);
  for (int32_t i = 0; i < n; ++i) {
    Rng rng(SplitSeed(spec.seed, {kUtteranceStream, static_cast<uint64_t>(split),
                                  static_cast<uint64_t>(i)}));
    Utterance utt;
    utt.utt_id = std::string(SplitName(split)) + "-" + std::to_string(i);
    utt.accent_id = i % spec.accent_count;
    const auto len = rng.UniformInt(spec.min_tokens, spec.max_tokens);
    for (int64_t k = 0; k < len; ++k) {
      int32_t tok;
      do {
        tok = static_cast<int32_t>(rng.UniformInt(1, spec.vocab));
      } while (!utt.tokens.empty() && tok == utt.tokens.back() && spec.vocab > 1);
      utt.tokens.push_back(tok);
    }
    const AccentColoring &col = colorings[utt.accent_id];
    FeatureMatrix &f = utt.features;
    f.rows = static_cast<int32_t>(len) * spec.frames_per_token;
    f.cols = d;
    f.data.resize(static_cast<size_t>(f.rows) * d);
    for (int32_t t = 0; t < f.rows; ++t) {
      const auto &proto = protos[utt.tokens[t / spec.frames_per_token] - 1];
      const double *src =
          proto.data() + static_cast<size_t>(t % spec.frames_per_token) * d;
      for (int32_t r = 0; r < d; ++r) {
        double acc = col.bias[r];
        const double *row = col.transform.data() + static_cast<size_t>(r) * d;
        for (int32_t c = 0; c < d; ++c) acc += row[c] * src[c];
        frame[r] = acc;
      }
      for (int32_t r = 0; r < d; ++r)
        f.At(t, r) = static_cast<float>(frame[r] + spec.noise_std * rng.Normal());
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

FeatureMatrix SpecAugment(const FeatureMatrix &features,
                          const SpecAugmentPolicy &policy, Rng &rng) {
  FeatureMatrix out = features;
  const int32_t rows = features.rows, cols = features.cols;
  if (rows == 0 || cols == 0) return out;
  std::vector<double> mean(cols, 0.0);
  for (int32_t t = 0; t < rows; ++t)
    for (int32_t c = 0; c < cols; ++c) mean[c] += features.At(t, c);
  for (double &m : mean) m /= rows;

  for (int32_t k = 0; k < policy.n_time_masks; ++k) {
    const int32_t width =
        static_cast<int32_t>(rng.UniformInt(0, std::min(policy.max_time_width, rows)));
    const int32_t start = static_cast<int32_t>(rng.UniformInt(0, rows - width));
    for (int32_t t = start; t < start + width; ++t)
      for (int32_t c = 0; c < cols; ++c) out.At(t, c) = static_cast<float>(mean[c]);
  }
  for (int32_t k = 0; k < policy.n_freq_masks; ++k) {
    const int32_t width =
        static_cast<int32_t>(rng.UniformInt(0, std::min(policy.max_freq_width, cols)));
    const int32_t start = static_cast<int32_t>(rng.UniformInt(0, cols - width));
    for (int32_t t = 0; t < rows; ++t)
      for (int32_t c = start; c < start + width; ++c)
        out.At(t, c) = static_cast<float>(mean[c]);
  }
  return out;
}

FeatureMatrix SpeedPerturb(const FeatureMatrix &features, double factor) {
  if (!(factor > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "speed factor must be positive");
  if (factor == 1.0) return features;
  const int32_t rows = static_cast<int32_t>(std::lround(features.rows / factor));
  if (rows < 1 || features.rows < 1)
    throw Error(ErrorCode::kDegenerateLength,
                "speed factor " + std::to_string(factor) + " leaves no frames");
  FeatureMatrix out;
  out.rows = rows;
  out.cols = features.cols;
  out.data.resize(static_cast<size_t>(rows) * out.cols);
  const int32_t last = features.rows - 1;
  for (int32_t j = 0; j < rows; ++j) {
    const double pos = std::min(j * factor, static_cast<double>(last));
    const int32_t lo = static_cast<int32_t>(std::floor(pos));
    const int32_t hi = std::min(lo + 1, last);
    const double frac = pos - lo;
    for (int32_t c = 0; c < out.cols; ++c) {
      const double a = features.At(lo, c), b = features.At(hi, c);
      // a + frac * (b - a) keeps constant inputs exactly constant.
      out.At(j, c) = static_cast<float>(a + frac * (b - a));
    }
  }
  return out;
}

}  // namespace mtjr
