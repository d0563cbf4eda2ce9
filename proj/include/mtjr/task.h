// mtjr/task.h

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

#ifndef MTJR_TASK_H_
#define MTJR_TASK_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtjr/transformer.h"

namespace mtjr {

// mono_asr: transformer ASR alone. mono_ar: encoder + accent head alone.
// stjr: ASR whose transcripts carry an accent tag token. mtjr: shared
// encoder with both heads.
enum class TrainMode { kMonoAsr, kMonoAr, kStjr, kMtjr };
// Where STJR puts the accent tag in the target sequence.
enum class TagPosition { kAppend, kPrepend };

const char *ModeName(TrainMode mode);
TrainMode ModeFromName(const std::string &name);
const char *TagPositionName(TagPosition pos);
TagPosition TagPositionFromName(const std::string &name);

inline bool ModeHasAsr(TrainMode m) { return m != TrainMode::kMonoAr; }
inline bool ModeHasAccentHead(TrainMode m) {
  return m == TrainMode::kMonoAr || m == TrainMode::kMtjr;
}
inline bool ModeHasAccent(TrainMode m) { return m != TrainMode::kMonoAsr; }

// The ASR output sequence for one utterance: the transcript, with the
// accent tag attached in STJR mode.
std::vector<int32_t> AsrTargets(const ModelConfig &config, TrainMode mode,
                                TagPosition pos, std::span<const int32_t> tokens,
                                int32_t accent_id);

struct TagExtraction {
  std::vector<int32_t> transcript;
  std::optional<int32_t> accent;
};

// Removes accent-tag tokens. The reported accent is the tag closest to the
// configured position (last tag for append, first for prepend).
TagExtraction ExtractAccentTag(const ModelConfig &config,
                               std::span<const int32_t> tokens,
                               TagPosition pos);

}  // namespace mtjr

#endif  // MTJR_TASK_H_
