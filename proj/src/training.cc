// src/training.cc

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

#include "mtjr/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mtjr/accent-head.h"
#include "mtjr/error.h"
#include "mtjr/log.h"
#include "mtjr/ops.h"

namespace mtjr {

namespace {

// Stream ids for SplitSeed.
enum : uint64_t {
  kStreamBatchOrder = 101,
  kStreamDropout = 102,
  kStreamSpecAugment = 103,
  kStreamFinetune = 104,
};

Tensor FeatureTensor(const FeatureMatrix &f) {
  return Tensor({f.rows, f.cols}, std::vector<double>(f.data.begin(), f.data.end()));
}

bool Selected(std::span<const uint8_t> mask, size_t i) {
  return mask.empty() || mask[i] != 0;
}

}  // namespace

double NoamSchedule::LearningRate(int64_t step) const {
  if (step < 1) throw Error(ErrorCode::kInvalidArgument, "Noam step must be >= 1");
  const double s = static_cast<double>(step);
  return factor / std::sqrt(static_cast<double>(d_model)) *
         std::min(1.0 / std::sqrt(s), s * std::pow(warmup_steps, -1.5));
}

void NoamSchedule::Check() const {
  if (!(factor > 0.0) || warmup_steps < 1 || d_model < 1)
    throw Error(ErrorCode::kConfig, "Noam schedule needs factor > 0, warmup >= 1");
}

AdamState AdamState::ForParameters(const ParameterSet &params) {
  AdamState s;
  for (const auto &[name, t] : params.entries()) {
    s.m.emplace_back(t.Size(), 0.0);
    s.v.emplace_back(t.Size(), 0.0);
  }
  return s;
}

void AdamStep(ParameterSet &params, AdamState &state, double lr,
              const AdamConfig &config, std::span<const uint8_t> update) {
  auto &entries = params.entries();
  if (state.m.size() != entries.size() || state.v.size() != entries.size() ||
      (!update.empty() && update.size() != entries.size()))
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match parameters");
  for (size_t i = 0; i < entries.size(); ++i) {
    if (state.m[i].size() != entries[i].second.Size() ||
        state.v[i].size() != entries[i].second.Size())
      throw Error(ErrorCode::kShapeMismatch,
                  "optimizer state shape differs for " + entries[i].first);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!Selected(update, i)) continue;
    Tensor &p = entries[i].second;
    if (!p.HasGrad()) continue;
    std::span<const double> g = p.Grad();
    std::span<double> w = p.Values();
    std::vector<double> &m = state.m[i], &v = state.v[i];
    for (size_t k = 0; k < w.size(); ++k) {
      m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
      v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + config.epsilon);
    }
  }
}

double ClipGradNorm(ParameterSet &params, double max_norm,
                    std::span<const uint8_t> select) {
  auto &entries = params.entries();
  double sq = 0.0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (!Selected(select, i) || !entries[i].second.HasGrad()) continue;
    for (double g : entries[i].second.Grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (size_t i = 0; i < entries.size(); ++i) {
      if (!Selected(select, i) || !entries[i].second.HasGrad()) continue;
      for (double &g : entries[i].second.MutableGrad()) g *= s;
    }
  }
  return norm;
}

void TrainerConfig::Check(const ModelConfig &model) const {
  if (epochs < 0) throw Error(ErrorCode::kConfig, "epochs must be >= 0");
  if (batch_size < 1) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
  if (pretrain_epochs < 0) throw Error(ErrorCode::kConfig, "pretrain_epochs must be >= 0");
  if (!(grad_clip > 0.0)) throw Error(ErrorCode::kConfig, "grad_clip must be > 0");
  if (dev_limit < 0) throw Error(ErrorCode::kConfig, "dev_limit must be >= 0");
  if (dev_decode.beam < 1) throw Error(ErrorCode::kConfig, "dev beam must be >= 1");
  if (augmentation.speed_perturb) {
    for (double f : augmentation.speed_factors)
      if (!(f > 0.0)) throw Error(ErrorCode::kConfig, "speed factors must be > 0");
  }
  loss.Check();
  try {
    sharing.Check(model);
  } catch (const Error &e) {
    throw Error(ErrorCode::kConfig, e.message());
  }
  Schedule(model).Check();
}

NoamSchedule TrainerConfig::Schedule(const ModelConfig &model) const {
  NoamSchedule s;
  s.factor = noam_factor;
  s.warmup_steps = warmup_steps;
  s.d_model = model.d_model;
  return s;
}

TrainingState InitialState(const ModelConfig &config, uint64_t seed) {
  Model model(config, seed);
  AdamState opt = AdamState::ForParameters(model.params());
  return TrainingState{std::move(model), std::move(opt)};
}

std::vector<uint8_t> TrainableMask(const Model &model, TrainMode mode,
                                   const SharingConfig &sharing) {
  const auto &entries = model.params().entries();
  std::vector<uint8_t> mask(entries.size(), 1);
  for (size_t i = 0; i < entries.size(); ++i) {
    const std::string &name = entries[i].first;
    const bool head = Model::IsAccentHeadParameter(name);
    switch (mode) {
      case TrainMode::kMonoAsr:
      case TrainMode::kStjr:
        mask[i] = head ? 0 : 1;
        break;
      case TrainMode::kMtjr:
        break;
      case TrainMode::kMonoAr: {
        if (head || name.rfind("frontend.", 0) == 0) break;
        const int32_t layer = Model::EncoderLayerOf(name);
        mask[i] = layer >= 1 && layer <= sharing.tap_layer ? 1 : 0;
        break;
      }
    }
  }
  return mask;
}

UtteranceLoss ComputeUtteranceLoss(Tape &tape, const Model &model,
                                   const Utterance &utt,
                                   const TrainerConfig &config,
                                   const ForwardOptions &fwd) {
  const ModelConfig &mc = model.config();
  const TrainMode mode = config.mode;
  const int32_t depth = mode == TrainMode::kMonoAr ? config.sharing.tap_layer : 0;
  EncoderOutput enc =
      model.EncodeFeatures(tape, FeatureTensor(utt.features), utt.features.rows, fwd, depth);

  UtteranceLoss out;
  Tensor ctc, att, accent;
  if (ModeHasAsr(mode)) {
    std::vector<int32_t> target =
        AsrTargets(mc, mode, config.tag_position, utt.tokens, utt.accent_id);
    ctc = CtcLoss(tape, model.CtcLogits(tape, enc), target, enc.NumValid());
    std::vector<int32_t> in{SosEosId(mc)}, gold = target;
    in.insert(in.end(), target.begin(), target.end());
    gold.push_back(SosEosId(mc));
    att = AttentionCe(tape, model.DecodeLogits(tape, in, enc, fwd), gold,
                      config.loss.label_smoothing);
  }
  if (ModeHasAccentHead(mode))
    accent = AccentCe(tape, AccentBranch(tape, model, enc, config.sharing), utt.accent_id);

  if (mode == TrainMode::kMonoAr) {
    out.total = accent;
    out.values.accent = accent.Item();
    out.values.total = accent.Item();
  } else {
    out.total = CombineOnTape(tape, ctc, att, accent, config.loss);
    out.values.ctc = ctc.Item();
    out.values.att = att.Item();
    out.values.asr = config.loss.gamma * out.values.ctc +
                     (1.0 - config.loss.gamma) * out.values.att;
    out.values.accent = accent.Defined() ? accent.Item() : 0.0;
    out.values.total = out.total.Item();
  }
  return out;
}

TrainOutcome Train(const TrainerConfig &config, TrainingState initial,
                   std::span<const Utterance> train, std::span<const Utterance> dev,
                   const EpochCallback &on_epoch) {
  TrainOutcome outcome{std::move(initial), {}};
  Model &model = outcome.state.model;
  AdamState &opt = outcome.state.optimizer;
  const ModelConfig &mc = model.config();
  config.Check(mc);
  if (opt.m.size() != model.params().size())
    opt = AdamState::ForParameters(model.params());
  if (train.empty()) throw Error(ErrorCode::kConfig, "empty training corpus");

  // Training examples, with speed-perturbed copies.
  std::vector<Utterance> perturbed;
  std::vector<const Utterance *> examples;
  if (config.augmentation.speed_perturb) {
    for (double f : config.augmentation.speed_factors) {
      if (f == 1.0) continue;
      for (const Utterance &u : train) {
        Utterance c = u;
        c.features = SpeedPerturb(u.features, f);
        std::ostringstream id;
        id << u.utt_id << "-sp" << f;
        c.utt_id = id.str();
        perturbed.push_back(std::move(c));
      }
    }
  }
  for (const Utterance &u : train) examples.push_back(&u);
  for (const Utterance &u : perturbed) examples.push_back(&u);

  // Length-sorted buckets.
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return examples[a]->features.rows < examples[b]->features.rows;
  });
  std::vector<std::vector<size_t>> batches;
  for (size_t i = 0; i < order.size(); i += config.batch_size)
    batches.emplace_back(order.begin() + i,
                         order.begin() + std::min(order.size(), i + config.batch_size));

  const std::vector<uint8_t> trainable = TrainableMask(model, config.mode, config.sharing);
  const NoamSchedule noam = config.Schedule(mc);
  std::span<const Utterance> dev_set =
      config.dev_limit > 0 && static_cast<size_t>(config.dev_limit) < dev.size()
          ? dev.first(config.dev_limit)
          : dev;
  EvalOptions eval;
  eval.mode = config.mode;
  eval.sharing = config.sharing;
  eval.tag_position = config.tag_position;
  eval.decode = config.dev_decode;

  for (int32_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<size_t> batch_order(batches.size());
    std::iota(batch_order.begin(), batch_order.end(), 0);
    Rng shuffle_rng(SplitSeed(config.seed, {kStreamBatchOrder, static_cast<uint64_t>(epoch)}));
    for (size_t i = batch_order.size(); i > 1; --i)
      std::swap(batch_order[i - 1],
                batch_order[shuffle_rng.UniformInt(0, static_cast<int64_t>(i) - 1)]);

    EpochMetrics metrics;
    metrics.epoch = epoch;
    LossBreakdown sum;
    int64_t count = 0;
    for (size_t bi = 0; bi < batch_order.size(); ++bi) {
      const std::vector<size_t> &batch = batches[batch_order[bi]];
      model.params().ZeroGrad();
      const double weight = 1.0 / static_cast<double>(batch.size());
      for (size_t ex : batch) {
        const Utterance *utt = examples[ex];
        Utterance augmented;
        if (config.augmentation.spec_augment) {
          Rng rng(SplitSeed(config.seed, {kStreamSpecAugment,
                                          static_cast<uint64_t>(epoch), ex}));
          augmented = *utt;
          augmented.features = SpecAugment(utt->features, config.augmentation.policy, rng);
          utt = &augmented;
        }
        Rng dropout_rng(SplitSeed(config.seed, {kStreamDropout,
                                                static_cast<uint64_t>(epoch), ex}));
        ForwardOptions fwd;
        fwd.training = true;
        fwd.rng = &dropout_rng;
        Tape tape;
        UtteranceLoss loss = ComputeUtteranceLoss(tape, model, *utt, config, fwd);
        if (!std::isfinite(loss.values.total)) {
          std::ostringstream msg;
          msg << "loss is " << loss.values.total << " at epoch " << epoch << ", batch "
              << bi << " (utterance " << utt->utt_id << ")";
          throw Error(ErrorCode::kNonFinite, msg.str());
        }
        tape.Backward(Scale(tape, loss.total, weight));
        sum.ctc += loss.values.ctc;
        sum.att += loss.values.att;
        sum.asr += loss.values.asr;
        sum.accent += loss.values.accent;
        sum.total += loss.values.total;
        ++count;
      }
      const double norm = ClipGradNorm(model.params(), config.grad_clip, trainable);
      if (!std::isfinite(norm)) {
        std::ostringstream msg;
        msg << "gradient norm is " << norm << " at epoch " << epoch << ", batch " << bi;
        throw Error(ErrorCode::kNonFinite, msg.str());
      }
      if (norm > config.grad_clip) {
        ++metrics.clipped_steps;
        MTJR_VLOG(2) << "epoch " << epoch << " batch " << bi << ": clipped gradient norm "
                     << norm << " to " << config.grad_clip;
      }
      metrics.lr = noam.LearningRate(opt.step + 1);
      AdamStep(model.params(), opt, metrics.lr, AdamConfig{}, trainable);
      ++metrics.steps;
    }
    model.params().ZeroGrad();
    const double n = static_cast<double>(std::max<int64_t>(count, 1));
    metrics.loss = LossBreakdown{sum.ctc / n, sum.att / n, sum.asr / n, sum.accent / n,
                                 sum.total / n};
    if (config.dev_each_epoch && !dev_set.empty()) {
      EvalResult r = Evaluate(model, dev_set, eval);
      metrics.dev_wer = r.wer;
      metrics.dev_acc = r.accuracy;
    }
    MTJR_LOG << ModeName(config.mode) << " epoch " << epoch << ": total "
             << metrics.loss.total << ", lr " << metrics.lr << ", clipped "
             << metrics.clipped_steps << "/" << metrics.steps
             << (metrics.dev_wer ? ", dev wer " + std::to_string(*metrics.dev_wer) : "")
             << (metrics.dev_acc ? ", dev acc " + std::to_string(*metrics.dev_acc) : "");
    outcome.log.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
  }
  return outcome;
}

TrainingState PrepareFinetune(const Model &pretrained, const ModelConfig &target,
                              uint64_t seed) {
  const ModelConfig &src = pretrained.config();
  if (src.d_model != target.d_model || src.heads != target.heads ||
      src.enc_layers != target.enc_layers || src.dec_layers != target.dec_layers ||
      src.ffn_dim != target.ffn_dim || src.feature_dim != target.feature_dim ||
      src.subsample_factor != target.subsample_factor)
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "pretrained body does not match the fine-tuning model");
  TrainingState state = InitialState(target, SplitSeed(seed, {kStreamFinetune}));
  const std::vector<std::string> outputs = Model::OutputLayerNames();
  for (auto &[name, t] : state.model.params().entries()) {
    if (Model::IsAccentHeadParameter(name) ||
        std::find(outputs.begin(), outputs.end(), name) != outputs.end())
      continue;
    if (!pretrained.params().Contains(name))
      throw Error(ErrorCode::kIncompatibleCheckpoint, "pretrained model lacks " + name);
    const Tensor &from = pretrained.params().Get(name);
    if (from.shape() != t.shape())
      throw Error(ErrorCode::kIncompatibleCheckpoint, "shape differs for " + name);
    std::copy(from.Values().begin(), from.Values().end(), t.Values().begin());
  }
  return state;
}

PretrainOutcome PretrainThenFinetune(const TrainerConfig &config,
                                     const ModelConfig &model_config,
                                     std::span<const Utterance> pretrain_corpus,
                                     std::span<const Utterance> finetune_corpus,
                                     std::span<const Utterance> dev,
                                     const EpochCallback &on_epoch) {
  TrainerConfig pre = config;
  pre.mode = TrainMode::kMonoAsr;
  pre.epochs = config.pretrain_epochs;
  pre.dev_each_epoch = false;
  TrainOutcome first = Train(pre, InitialState(model_config, config.seed),
                             pretrain_corpus, {}, on_epoch);
  TrainingState ft = PrepareFinetune(first.state.model, model_config, config.seed);
  TrainOutcome second = Train(config, std::move(ft), finetune_corpus, dev, on_epoch);
  return PretrainOutcome{std::move(first), std::move(second)};
}

}  // namespace mtjr
