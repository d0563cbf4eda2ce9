// mtjr/transformer.h

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

#ifndef MTJR_TRANSFORMER_H_
#define MTJR_TRANSFORMER_H_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mtjr/rng.h"
#include "mtjr/tensor.h"

namespace mtjr {

struct ModelConfig {
  int32_t d_model = 64;
  int32_t heads = 4;
  int32_t enc_layers = 4;
  int32_t dec_layers = 2;
  int32_t ffn_dim = 128;
  double dropout = 0.1;
  // Output units: blank, transcript tokens, sos/eos, then one tag per
  // accent (the tags are only targets in STJR mode).
  int32_t vocab_size = 30;
  int32_t accent_count = 8;
  int32_t subsample_factor = 4;
  int32_t feature_dim = 83;

  // 12-layer encoder, 6-layer decoder, 4 heads, 83-dim input features.
  static ModelConfig PaperScale();
  void Check() const;
  bool operator==(const ModelConfig &) const = default;
};

// Vocabulary layout helpers. Blank is 0, transcript tokens are
// 1..NumTranscriptTokens(), then the shared sos/eos id, then the tags.
inline constexpr int32_t kBlankId = 0;
inline int32_t SosEosId(const ModelConfig &c) {
  return c.vocab_size - c.accent_count - 1;
}
inline int32_t NumTranscriptTokens(const ModelConfig &c) {
  return c.vocab_size - c.accent_count - 2;
}
inline int32_t AccentTagId(const ModelConfig &c, int32_t accent) {
  return c.vocab_size - c.accent_count + accent;
}
inline bool IsAccentTag(const ModelConfig &c, int32_t id) {
  return id >= c.vocab_size - c.accent_count && id < c.vocab_size;
}

// Which encoder layer (1-based) feeds the accent branch.
struct SharingConfig {
  int32_t tap_layer = 4;
  void Check(const ModelConfig &config) const;
};

// Named parameters in a fixed insertion order; the order defines the
// checkpoint layout and the gradient-norm summation order.
class ParameterSet {
 public:
  Tensor &Add(const std::string &name, Shape shape);
  bool Contains(const std::string &name) const;
  Tensor &Get(const std::string &name);
  const Tensor &Get(const std::string &name) const;
  size_t size() const { return entries_.size(); }
  std::vector<std::pair<std::string, Tensor>> &entries() { return entries_; }
  const std::vector<std::pair<std::string, Tensor>> &entries() const {
    return entries_;
  }
  void ZeroGrad();
  ParameterSet Clone() const;

 private:
  std::vector<std::pair<std::string, Tensor>> entries_;
  std::unordered_map<std::string, size_t> index_;
};

struct ForwardOptions {
  bool training = false;
  Rng *rng = nullptr;  // required when training with dropout > 0
  // When set, every attention probability matrix is appended here.
  std::vector<Tensor> *attention_probe = nullptr;
};

struct FrontendOutput {
  Tensor frames;              // [T' x d_model]
  std::vector<uint8_t> mask;  // 1 for frames built from valid input
};

struct EncoderOutput {
  std::vector<Tensor> layers;  // hidden state after each encoder layer
  std::vector<uint8_t> mask;
  int32_t NumFrames() const { return static_cast<int32_t>(mask.size()); }
  int32_t NumValid() const;
  // 1-based layer index, as in SharingConfig.
  const Tensor &Layer(int32_t k) const { return layers.at(k - 1); }
  const Tensor &Final() const { return layers.back(); }
};

// sin at even, cos at odd columns: pe[p][2i] = sin(p / 10000^(2i/d)).
std::vector<double> SinusoidalPositions(int32_t length, int32_t dim);

// The shared encoder, the attention decoder, the CTC projection, and the
// accent head parameters (the branch itself lives in accent-head.h).
class Model {
 public:
  Model(const ModelConfig &config, uint64_t seed);
  // Builds the parameter layout without drawing any weights (all zero).
  static Model Empty(const ModelConfig &config);

  const ModelConfig &config() const { return config_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }
  Model Clone() const;

  // Stacks groups of subsample_factor frames, projects to d_model and adds
  // positional encodings. `length` is the number of valid (unpadded) input
  // frames; features may carry padding rows beyond it.
  FrontendOutput Frontend(Tape &tape, const Tensor &features, int32_t length,
                          const ForwardOptions &opts) const;
  // Runs the first `num_layers` encoder layers (0 = all), keeping every
  // layer's output.
  EncoderOutput Encode(Tape &tape, const FrontendOutput &input,
                       const ForwardOptions &opts, int32_t num_layers = 0) const;
  EncoderOutput EncodeFeatures(Tape &tape, const Tensor &features,
                               int32_t length, const ForwardOptions &opts,
                               int32_t num_layers = 0) const;
  // tokens[0] must be sos; row i of the result predicts tokens[i+1].
  Tensor DecodeLogits(Tape &tape, std::span<const int32_t> tokens,
                      const EncoderOutput &encoded,
                      const ForwardOptions &opts) const;
  // [T' x vocab] from the final encoder layer.
  Tensor CtcLogits(Tape &tape, const EncoderOutput &encoded) const;

  // Names of the output embedding and output projections that the
  // fine-tuning recipe replaces.
  static std::vector<std::string> OutputLayerNames();
  static bool IsAccentHeadParameter(const std::string &name);
  static bool IsDecoderParameter(const std::string &name);
  // Encoder layer (1-based) owning `name`, or 0 for a non-layer parameter.
  static int32_t EncoderLayerOf(const std::string &name);

  void ReinitializeOutputLayers(uint64_t seed);
  void ReinitializeAccentHead(uint64_t seed);

 private:
  explicit Model(const ModelConfig &config);
  void BuildLayout();
  void InitializeParameter(const std::string &name, uint64_t seed);

  Tensor Attention(Tape &tape, const std::string &prefix, const Tensor &query,
                   const Tensor &memory, std::span<const uint8_t> keep,
                   const ForwardOptions &opts) const;
  Tensor FeedForward(Tape &tape, const std::string &prefix,
                     const Tensor &x) const;
  Tensor Norm(Tape &tape, const std::string &prefix, const Tensor &x) const;
  const Tensor &P(const std::string &name) const { return params_.Get(name); }

  ModelConfig config_;
  ParameterSet params_;
};

}  // namespace mtjr

#endif  // MTJR_TRANSFORMER_H_
