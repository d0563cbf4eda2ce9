// src/transformer.cc

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

#include "mtjr/transformer.h"

#include <algorithm>
#include <cmath>

#include "mtjr/error.h"
#include "mtjr/ops.h"

namespace mtjr {

ModelConfig ModelConfig::PaperScale() {
  ModelConfig c;
  c.d_model = 256;
  c.heads = 4;
  c.enc_layers = 12;
  c.dec_layers = 6;
  c.ffn_dim = 2048;
  c.dropout = 0.1;
  c.feature_dim = 83;
  return c;
}

void ModelConfig::Check() const {
  auto fail = [](const std::string &m) { throw Error(ErrorCode::kConfig, m); };
  if (d_model < 1 || heads < 1 || d_model % heads != 0)
    fail("d_model must be a positive multiple of heads");
  if (enc_layers < 1) fail("enc_layers must be >= 1");
  if (dec_layers < 1) fail("dec_layers must be >= 1");
  if (ffn_dim < 1) fail("ffn_dim must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (accent_count < 2) fail("accent_count must be >= 2");
  if (subsample_factor < 1) fail("subsample_factor must be >= 1");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  // blank + at least one token + sos/eos + tags
  if (vocab_size < accent_count + 3)
    fail("vocab_size too small for blank, tokens, sos/eos and accent tags");
}

void SharingConfig::Check(const ModelConfig &config) const {
  if (tap_layer < 1 || tap_layer > config.enc_layers)
    throw Error(ErrorCode::kConfig,
                "tap_layer " + std::to_string(tap_layer) + " outside [1, " +
                    std::to_string(config.enc_layers) + "]");
}

Tensor &ParameterSet::Add(const std::string &name, Shape shape) {
  if (index_.count(name))
    throw Error(ErrorCode::kInvalidArgument, "duplicate parameter " + name);
  index_[name] = entries_.size();
  entries_.emplace_back(name, Tensor::Zeros(std::move(shape), true));
  return entries_.back().second;
}

bool ParameterSet::Contains(const std::string &name) const {
  return index_.count(name) != 0;
}

Tensor &ParameterSet::Get(const std::string &name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw Error(ErrorCode::kInvalidArgument, "no parameter " + name);
  return entries_[it->second].second;
}

const Tensor &ParameterSet::Get(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw Error(ErrorCode::kInvalidArgument, "no parameter " + name);
  return entries_[it->second].second;
}

void ParameterSet::ZeroGrad() {
  for (auto &e : entries_) e.second.ZeroGrad();
}

ParameterSet ParameterSet::Clone() const {
  ParameterSet copy;
  copy.index_ = index_;
  for (const auto &e : entries_) copy.entries_.emplace_back(e.first, e.second.Clone());
  return copy;
}

int32_t EncoderOutput::NumValid() const {
  return static_cast<int32_t>(std::count(mask.begin(), mask.end(), 1));
}

std::vector<double> SinusoidalPositions(int32_t length, int32_t dim) {
  std::vector<double> pe(static_cast<size_t>(length) * dim);
  for (int32_t p = 0; p < length; ++p) {
    for (int32_t i = 0; i < dim; i += 2) {
      const double angle =
          p / std::pow(10000.0, static_cast<double>(i) / dim);
      pe[static_cast<size_t>(p) * dim + i] = std::sin(angle);
      if (i + 1 < dim) pe[static_cast<size_t>(p) * dim + i + 1] = std::cos(angle);
    }
  }
  return pe;
}

namespace {

void AddAttentionParams(ParameterSet &ps, const std::string &prefix, int32_t d) {
  // No key bias: it shifts every score of a query by the same amount, so
  // softmax cancels it and its gradient is identically zero.
  for (const char *proj : {"q", "k", "v", "o"}) {
    ps.Add(prefix + "." + proj + ".weight", {d, d});
    if (proj[0] != 'k') ps.Add(prefix + "." + proj + ".bias", {d});
  }
}

void AddNormParams(ParameterSet &ps, const std::string &prefix, int32_t d) {
  ps.Add(prefix + ".gain", {d});
  ps.Add(prefix + ".bias", {d});
}

void AddFfnParams(ParameterSet &ps, const std::string &prefix, int32_t d,
                  int32_t ffn) {
  ps.Add(prefix + ".w1.weight", {d, ffn});
  ps.Add(prefix + ".w1.bias", {ffn});
  ps.Add(prefix + ".w2.weight", {ffn, d});
  ps.Add(prefix + ".w2.bias", {d});
}

bool EndsWith(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool StartsWith(const std::string &s, const std::string &prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

}  // namespace

Model::Model(const ModelConfig &config) : config_(config) {
  config_.Check();
  BuildLayout();
}

Model::Model(const ModelConfig &config, uint64_t seed) : Model(config) {
  for (const auto &e : params_.entries()) InitializeParameter(e.first, seed);
}

Model Model::Empty(const ModelConfig &config) { return Model(config); }

Model Model::Clone() const {
  Model copy(config_);
  copy.params_ = params_.Clone();
  return copy;
}

void Model::BuildLayout() {
  const int32_t d = config_.d_model;
  params_.Add("frontend.proj.weight",
              {config_.subsample_factor * config_.feature_dim, d});
  params_.Add("frontend.proj.bias", {d});
  for (int32_t l = 1; l <= config_.enc_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    AddNormParams(params_, p + ".attn_norm", d);
    AddAttentionParams(params_, p + ".attn", d);
    AddNormParams(params_, p + ".ffn_norm", d);
    AddFfnParams(params_, p + ".ffn", d, config_.ffn_dim);
  }
  params_.Add("decoder.embed.weight", {config_.vocab_size, d});
  for (int32_t l = 1; l <= config_.dec_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    AddNormParams(params_, p + ".self_norm", d);
    AddAttentionParams(params_, p + ".self_attn", d);
    AddNormParams(params_, p + ".src_norm", d);
    AddAttentionParams(params_, p + ".src_attn", d);
    AddNormParams(params_, p + ".ffn_norm", d);
    AddFfnParams(params_, p + ".ffn", d, config_.ffn_dim);
  }
  AddNormParams(params_, "decoder.final_norm", d);
  params_.Add("decoder.output.weight", {d, config_.vocab_size});
  params_.Add("decoder.output.bias", {config_.vocab_size});
  params_.Add("ctc.output.weight", {d, config_.vocab_size});
  params_.Add("ctc.output.bias", {config_.vocab_size});
  params_.Add("accent_head.weight", {2 * d, config_.accent_count});
  params_.Add("accent_head.bias", {config_.accent_count});
}

void Model::InitializeParameter(const std::string &name, uint64_t seed) {
  Tensor &t = params_.Get(name);
  auto v = t.Values();
  if (EndsWith(name, ".gain")) {
    std::fill(v.begin(), v.end(), 1.0);
  } else if (t.NumDims() < 2) {
    std::fill(v.begin(), v.end(), 0.0);
  } else {
    // Xavier-uniform; each parameter draws from its own stream.
    Rng rng(SplitSeed(seed, {HashName(name)}));
    const double limit = std::sqrt(6.0 / (t.Dim(0) + t.Dim(1)));
    for (double &x : v) x = rng.Uniform(-limit, limit);
  }
}

std::vector<std::string> Model::OutputLayerNames() {
  return {"decoder.embed.weight", "decoder.output.weight",
          "decoder.output.bias", "ctc.output.weight", "ctc.output.bias"};
}

bool Model::IsAccentHeadParameter(const std::string &name) {
  return StartsWith(name, "accent_head.");
}

bool Model::IsDecoderParameter(const std::string &name) {
  return StartsWith(name, "decoder.");
}

int32_t Model::EncoderLayerOf(const std::string &name) {
  if (!StartsWith(name, "encoder.")) return 0;
  return std::stoi(name.substr(8, name.find('.', 8) - 8));
}

void Model::ReinitializeOutputLayers(uint64_t seed) {
  for (const std::string &name : OutputLayerNames()) InitializeParameter(name, seed);
}

void Model::ReinitializeAccentHead(uint64_t seed) {
  InitializeParameter("accent_head.weight", seed);
  InitializeParameter("accent_head.bias", seed);
}

Tensor Model::Norm(Tape &tape, const std::string &prefix,
                   const Tensor &x) const {
  return LayerNorm(tape, x, P(prefix + ".gain"), P(prefix + ".bias"));
}

Tensor Model::FeedForward(Tape &tape, const std::string &prefix,
                          const Tensor &x) const {
  Tensor h = Relu(tape, Linear(tape, x, P(prefix + ".w1.weight"),
                               P(prefix + ".w1.bias")));
  return Linear(tape, h, P(prefix + ".w2.weight"), P(prefix + ".w2.bias"));
}

Tensor Model::Attention(Tape &tape, const std::string &prefix,
                        const Tensor &query, const Tensor &memory,
                        std::span<const uint8_t> keep,
                        const ForwardOptions &opts) const {
  const int32_t heads = config_.heads;
  const int32_t dk = config_.d_model / heads;
  Tensor q = Linear(tape, query, P(prefix + ".q.weight"), P(prefix + ".q.bias"));
  Tensor k = MatMul(tape, memory, P(prefix + ".k.weight"));
  Tensor v = Linear(tape, memory, P(prefix + ".v.weight"), P(prefix + ".v.bias"));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<Tensor> contexts;
  contexts.reserve(heads);
  for (int32_t h = 0; h < heads; ++h) {
    Tensor qh = SliceCols(tape, q, h * dk, dk);
    Tensor kh = SliceCols(tape, k, h * dk, dk);
    Tensor vh = SliceCols(tape, v, h * dk, dk);
    Tensor scores = Scale(tape, MatMul(tape, qh, kh, kNoTrans, kTrans), scale);
    Tensor probs = MaskedSoftmax(tape, scores, keep);
    if (opts.attention_probe) opts.attention_probe->push_back(probs);
    contexts.push_back(MatMul(tape, probs, vh));
  }
  Tensor merged = ConcatCols(tape, contexts);
  return Linear(tape, merged, P(prefix + ".o.weight"), P(prefix + ".o.bias"));
}

FrontendOutput Model::Frontend(Tape &tape, const Tensor &features,
                               int32_t length,
                               const ForwardOptions &opts) const {
  const int32_t s = config_.subsample_factor;
  if (features.NumDims() != 2 || features.Dim(1) != config_.feature_dim)
    throw Error(ErrorCode::kShapeMismatch,
                "features " + ShapeToString(features.shape()) +
                    " do not match feature_dim " +
                    std::to_string(config_.feature_dim));
  const int32_t total = features.Dim(0);
  if (length < 0 || length > total)
    throw Error(ErrorCode::kInvalidArgument, "length exceeds feature rows");
  if (total < s || length < s)
    throw Error(ErrorCode::kTooShort,
                std::to_string(length) + " frames for subsampling factor " +
                    std::to_string(s));
  const int32_t out_frames = total / s;
  const int32_t valid = length / s;
  Tensor stacked = Reshape(tape, SliceRows(tape, features, 0, out_frames * s),
                           {out_frames, s * config_.feature_dim});
  Tensor projected = Linear(tape, stacked, P("frontend.proj.weight"),
                            P("frontend.proj.bias"));
  Tensor pe({out_frames, config_.d_model},
            SinusoidalPositions(out_frames, config_.d_model));
  FrontendOutput out;
  out.frames = Dropout(tape, Add(tape, projected, pe), config_.dropout,
                       opts.rng, opts.training);
  out.mask.assign(out_frames, 0);
  std::fill(out.mask.begin(), out.mask.begin() + valid, 1);
  return out;
}

EncoderOutput Model::Encode(Tape &tape, const FrontendOutput &input,
                            const ForwardOptions &opts,
                            int32_t num_layers) const {
  if (num_layers <= 0) num_layers = config_.enc_layers;
  if (num_layers > config_.enc_layers)
    throw Error(ErrorCode::kInvalidArgument, "more encoder layers than configured");
  const int32_t frames = static_cast<int32_t>(input.mask.size());
  // Every query may look at every valid key.
  std::vector<uint8_t> keep(static_cast<size_t>(frames) * frames);
  for (int32_t i = 0; i < frames; ++i)
    std::copy(input.mask.begin(), input.mask.end(),
              keep.begin() + static_cast<size_t>(i) * frames);
  EncoderOutput out;
  out.mask = input.mask;
  Tensor x = input.frames;
  for (int32_t l = 1; l <= num_layers; ++l) {
    const std::string p = "encoder." + std::to_string(l);
    Tensor h = Norm(tape, p + ".attn_norm", x);
    Tensor a = Attention(tape, p + ".attn", h, h, keep, opts);
    x = Add(tape, x, Dropout(tape, a, config_.dropout, opts.rng, opts.training));
    h = Norm(tape, p + ".ffn_norm", x);
    Tensor f = FeedForward(tape, p + ".ffn", h);
    x = Add(tape, x, Dropout(tape, f, config_.dropout, opts.rng, opts.training));
    out.layers.push_back(x);
  }
  return out;
}

EncoderOutput Model::EncodeFeatures(Tape &tape, const Tensor &features,
                                    int32_t length, const ForwardOptions &opts,
                                    int32_t num_layers) const {
  return Encode(tape, Frontend(tape, features, length, opts), opts, num_layers);
}

Tensor Model::DecodeLogits(Tape &tape, std::span<const int32_t> tokens,
                           const EncoderOutput &encoded,
                           const ForwardOptions &opts) const {
  const int32_t len = static_cast<int32_t>(tokens.size());
  if (len == 0) throw Error(ErrorCode::kEmptySequence, "decoder input is empty");
  if (tokens[0] != SosEosId(config_))
    throw Error(ErrorCode::kInvalidArgument, "decoder input must start with sos");
  if (static_cast<int32_t>(encoded.layers.size()) != config_.enc_layers)
    throw Error(ErrorCode::kInvalidArgument, "decoder needs the full encoder stack");
  const int32_t d = config_.d_model;
  const int32_t frames = encoded.NumFrames();
  std::vector<uint8_t> causal(static_cast<size_t>(len) * len, 0);
  for (int32_t i = 0; i < len; ++i)
    for (int32_t j = 0; j <= i; ++j) causal[static_cast<size_t>(i) * len + j] = 1;
  std::vector<uint8_t> source(static_cast<size_t>(len) * frames);
  for (int32_t i = 0; i < len; ++i)
    std::copy(encoded.mask.begin(), encoded.mask.end(),
              source.begin() + static_cast<size_t>(i) * frames);

  Tensor pe({len, d}, SinusoidalPositions(len, d));
  Tensor y = Add(tape, Embedding(tape, P("decoder.embed.weight"), tokens), pe);
  y = Dropout(tape, y, config_.dropout, opts.rng, opts.training);
  const Tensor &memory = encoded.Final();
  for (int32_t l = 1; l <= config_.dec_layers; ++l) {
    const std::string p = "decoder." + std::to_string(l);
    Tensor h = Norm(tape, p + ".self_norm", y);
    Tensor a = Attention(tape, p + ".self_attn", h, h, causal, opts);
    y = Add(tape, y, Dropout(tape, a, config_.dropout, opts.rng, opts.training));
    h = Norm(tape, p + ".src_norm", y);
    a = Attention(tape, p + ".src_attn", h, memory, source, opts);
    y = Add(tape, y, Dropout(tape, a, config_.dropout, opts.rng, opts.training));
    h = Norm(tape, p + ".ffn_norm", y);
    Tensor f = FeedForward(tape, p + ".ffn", h);
    y = Add(tape, y, Dropout(tape, f, config_.dropout, opts.rng, opts.training));
  }
  y = Norm(tape, "decoder.final_norm", y);
  return Linear(tape, y, P("decoder.output.weight"), P("decoder.output.bias"));
}

Tensor Model::CtcLogits(Tape &tape, const EncoderOutput &encoded) const {
  if (static_cast<int32_t>(encoded.layers.size()) != config_.enc_layers)
    throw Error(ErrorCode::kInvalidArgument, "CTC needs the full encoder stack");
  return Linear(tape, encoded.Final(), P("ctc.output.weight"),
                P("ctc.output.bias"));
}

}  // namespace mtjr
