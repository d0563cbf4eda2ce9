// src/task.cc

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

#include "mtjr/task.h"

#include "mtjr/error.h"

namespace mtjr {

const char *ModeName(TrainMode mode) {
  switch (mode) {
    case TrainMode::kMonoAsr: return "mono_asr";
    case TrainMode::kMonoAr: return "mono_ar";
    case TrainMode::kStjr: return "stjr";
    case TrainMode::kMtjr: return "mtjr";
  }
  return "unknown";
}

TrainMode ModeFromName(const std::string &name) {
  if (name == "mono_asr") return TrainMode::kMonoAsr;
  if (name == "mono_ar") return TrainMode::kMonoAr;
  if (name == "stjr") return TrainMode::kStjr;
  if (name == "mtjr") return TrainMode::kMtjr;
  throw Error(ErrorCode::kConfig, "unknown mode '" + name + "'");
}

const char *TagPositionName(TagPosition pos) {
  return pos == TagPosition::kAppend ? "append" : "prepend";
}

TagPosition TagPositionFromName(const std::string &name) {
  if (name == "append") return TagPosition::kAppend;
  if (name == "prepend") return TagPosition::kPrepend;
  throw Error(ErrorCode::kConfig, "unknown tag position '" + name + "'");
}

std::vector<int32_t> AsrTargets(const ModelConfig &config, TrainMode mode,
                                TagPosition pos, std::span<const int32_t> tokens,
                                int32_t accent_id) {
  std::vector<int32_t> out(tokens.begin(), tokens.end());
  if (mode != TrainMode::kStjr) return out;
  if (accent_id < 0 || accent_id >= config.accent_count)
    throw Error(ErrorCode::kLabelOutOfRange, "accent id outside accent_count");
  const int32_t tag = AccentTagId(config, accent_id);
  if (pos == TagPosition::kAppend) out.push_back(tag);
  else out.insert(out.begin(), tag);
  return out;
}

TagExtraction ExtractAccentTag(const ModelConfig &config,
                               std::span<const int32_t> tokens,
                               TagPosition pos) {
  TagExtraction r;
  for (int32_t t : tokens) {
    if (IsAccentTag(config, t)) {
      const int32_t accent = t - (config.vocab_size - config.accent_count);
      if (pos == TagPosition::kAppend || !r.accent) r.accent = accent;
    } else {
      r.transcript.push_back(t);
    }
  }
  return r;
}

}  // namespace mtjr
