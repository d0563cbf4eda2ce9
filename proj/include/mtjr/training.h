// mtjr/training.h

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

#ifndef MTJR_TRAINING_H_
#define MTJR_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtjr/corpus.h"
#include "mtjr/evaluate.h"
#include "mtjr/losses.h"
#include "mtjr/task.h"
#include "mtjr/transformer.h"

namespace mtjr {

// lr(step) = factor * d_model^-0.5 * min(step^-0.5, step * warmup^-1.5);
// rises linearly to its peak at step == warmup_steps, then decays as
// step^-0.5.
struct NoamSchedule {
  double factor = 1.0;
  int32_t warmup_steps = 4000;
  int32_t d_model = 64;

  double LearningRate(int64_t step) const;
  void Check() const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
};

struct AdamState {
  // First and second moments, one entry per parameter in ParameterSet order.
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  int64_t step = 0;

  static AdamState ForParameters(const ParameterSet &params);
};

// One bias-corrected Adam update using each parameter's current gradient.
// Parameters with update[i] == 0 are left alone (moments included); an empty
// `update` means all. Throws ShapeMismatch if `state` does not match.
void AdamStep(ParameterSet &params, AdamState &state, double lr,
              const AdamConfig &config = {}, std::span<const uint8_t> update = {});

// Scales all gradients (of the selected parameters) so their joint L2 norm
// is at most max_norm. Returns the norm before clipping.
double ClipGradNorm(ParameterSet &params, double max_norm,
                    std::span<const uint8_t> select = {});

struct AugmentationConfig {
  bool spec_augment = false;
  SpecAugmentPolicy policy;
  // Adds a perturbed copy of the training set per extra factor (1.0 is the
  // original and is always present).
  bool speed_perturb = false;
  std::vector<double> speed_factors = {0.9, 1.0, 1.1};
};

struct TrainerConfig {
  TrainMode mode = TrainMode::kMtjr;
  int32_t epochs = 10;
  int32_t batch_size = 16;
  LossConfig loss;
  SharingConfig sharing;
  std::optional<std::string> init_from;
  uint64_t seed = 1;
  AugmentationConfig augmentation;
  double noam_factor = 1.0;
  int32_t warmup_steps = 400;
  double grad_clip = 5.0;
  TagPosition tag_position = TagPosition::kAppend;
  // Epochs of ASR-only training on the out-of-domain corpus before
  // fine-tuning (pretrain-then-finetune only).
  int32_t pretrain_epochs = 3;
  // Per-epoch dev evaluation; dev_limit = 0 uses the whole dev set.
  bool dev_each_epoch = true;
  int32_t dev_limit = 0;
  DecodeOptions dev_decode{1, 1.0, 0.0};

  void Check(const ModelConfig &model) const;
  NoamSchedule Schedule(const ModelConfig &model) const;
};

struct EpochMetrics {
  int32_t epoch = 0;
  LossBreakdown loss;  // per-utterance averages over the epoch
  std::optional<double> dev_wer;
  std::optional<double> dev_acc;
  double lr = 0.0;  // at the last step of the epoch
  int64_t steps = 0;
  int64_t clipped_steps = 0;
};

struct TrainingState {
  Model model;
  AdamState optimizer;
};

TrainingState InitialState(const ModelConfig &config, uint64_t seed);

// Which parameters a mode may update (1) in ParameterSet order. mono_ar
// touches only the frontend, encoder layers up to the tap and the accent
// head; mono_asr and stjr leave the accent head alone.
std::vector<uint8_t> TrainableMask(const Model &model, TrainMode mode,
                                   const SharingConfig &sharing);

// Loss breakdown of one utterance on `tape`; `total` is the tensor to
// backpropagate.
struct UtteranceLoss {
  LossBreakdown values;
  Tensor total;
};
UtteranceLoss ComputeUtteranceLoss(Tape &tape, const Model &model,
                                   const Utterance &utt,
                                   const TrainerConfig &config,
                                   const ForwardOptions &fwd);

struct TrainOutcome {
  TrainingState state;
  std::vector<EpochMetrics> log;
};

using EpochCallback = std::function<void(const EpochMetrics &)>;

// Runs config.epochs epochs of config.mode from `initial`. Batches come from
// length-sorted buckets in a per-epoch shuffled order; each utterance of a
// batch runs on its own tape and the batch-averaged gradient drives one
// clipped Adam step at the Noam rate. Throws NonFinite (naming the epoch and
// batch) if a loss blows up.
TrainOutcome Train(const TrainerConfig &config, TrainingState initial,
                   std::span<const Utterance> train,
                   std::span<const Utterance> dev = {},
                   const EpochCallback &on_epoch = {});

// Carries every body weight of `pretrained` into a fresh state for
// `target`, re-drawing the output embedding, both output projections and
// the accent head. The optimizer and step counter restart. Throws
// IncompatibleCheckpoint when the body shapes differ.
TrainingState PrepareFinetune(const Model &pretrained, const ModelConfig &target,
                              uint64_t seed);

struct PretrainOutcome {
  TrainOutcome pretrain;
  TrainOutcome finetune;
};

// Phase 1: mono_asr for config.pretrain_epochs on `pretrain_corpus`.
// Phase 2: PrepareFinetune, then config.mode on `finetune_corpus`.
PretrainOutcome PretrainThenFinetune(const TrainerConfig &config,
                                     const ModelConfig &model_config,
                                     std::span<const Utterance> pretrain_corpus,
                                     std::span<const Utterance> finetune_corpus,
                                     std::span<const Utterance> dev = {},
                                     const EpochCallback &on_epoch = {});

}  // namespace mtjr

#endif  // MTJR_TRAINING_H_
