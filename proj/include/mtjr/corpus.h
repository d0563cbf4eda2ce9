// mtjr/corpus.h

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

#ifndef MTJR_CORPUS_H_
#define MTJR_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mtjr/rng.h"

namespace mtjr {

// Row-major frames x dims, stored in single precision as on disk.
struct FeatureMatrix {
  int32_t rows = 0;
  int32_t cols = 0;
  std::vector<float> data;

  float At(int32_t r, int32_t c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  float &At(int32_t r, int32_t c) {
    return data[static_cast<size_t>(r) * cols + c];
  }
  bool operator==(const FeatureMatrix &) const = default;
};

struct Utterance {
  std::string utt_id;
  FeatureMatrix features;
  std::vector<int32_t> tokens;  // transcript ids, no blank/sos/eos
  int32_t accent_id = 0;
  bool operator==(const Utterance &) const = default;
};

using Corpus = std::vector<Utterance>;

enum class Split { kTrain, kDev, kTest, kOutDomain };
const char *SplitName(Split split);
Split SplitFromName(const std::string &name);

// Accent names of the 8-accent English set, in label order.
const std::vector<std::string> &DefaultAccentNames();
std::string AccentName(int32_t accent);

// Synthetic accented speech. Each token has a fixed prototype block of
// frames_per_token x feature_dim. An utterance concatenates its tokens'
// blocks, passes every frame through its accent's coloring
//   x -> A_accent x + b_accent
// and adds white noise. A_accent = I + accent_strength * R with R drawn
// entrywise from N(0, 1), redrawn until well conditioned.
struct SyntheticCorpusSpec {
  int32_t vocab = 20;
  int32_t accent_count = 8;
  int32_t feature_dim = 83;
  int32_t frames_per_token = 6;
  int32_t min_tokens = 3;
  int32_t max_tokens = 10;
  double prototype_std = 1.0;
  double noise_std = 0.5;
  double accent_strength = 0.1;
  double accent_bias_std = 0.05;
  // Accent strength of the out-of-domain split; 0 gives uncolored speech.
  double outdomain_accent_strength = 0.0;
  int32_t train_size = 2000;
  int32_t dev_size = 200;
  int32_t test_size = 400;
  int32_t outdomain_size = 8000;
  uint64_t seed = 1;

  void Check() const;
  int32_t SplitSize(Split split) const;
};

struct AccentColoring {
  std::vector<double> transform;  // D x D row-major
  std::vector<double> bias;       // D
  double condition_number = 1.0;
};

// Token prototypes [vocab][frames_per_token * feature_dim], ids 1..vocab at
// index id-1.
std::vector<std::vector<double>> TokenPrototypes(const SyntheticCorpusSpec &spec);
std::vector<AccentColoring> AccentColorings(const SyntheticCorpusSpec &spec,
                                            double strength);

// Deterministic in (spec, split). Accents are assigned round-robin; token
// sequences never repeat a token back to back.
Corpus GenerateCorpus(const SyntheticCorpusSpec &spec, Split split);

struct SpecAugmentPolicy {
  int32_t n_time_masks = 2;
  int32_t max_time_width = 5;
  int32_t n_freq_masks = 2;
  int32_t max_freq_width = 10;
};

// Masks random time and frequency bands. Masked cells take the utterance's
// mean value for that feature dimension. Bands are clipped to the matrix.
FeatureMatrix SpecAugment(const FeatureMatrix &features,
                          const SpecAugmentPolicy &policy, Rng &rng);

// Linear time-axis resampling to round(T / factor) frames; output frame j
// reads source position j * factor (clamped to the last frame).
FeatureMatrix SpeedPerturb(const FeatureMatrix &features, double factor);

}  // namespace mtjr

#endif  // MTJR_CORPUS_H_
