// mtjr/checkpoint.h

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

#ifndef MTJR_CHECKPOINT_H_
#define MTJR_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "mtjr/task.h"
#include "mtjr/training.h"

namespace mtjr {

inline constexpr char kCheckpointMagic[4] = {'M', 'T', 'J', 'C'};
inline constexpr uint16_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainingState state;
  TrainMode mode = TrainMode::kMtjr;
  SharingConfig sharing;
  TagPosition tag_position = TagPosition::kAppend;
};

// Layout (little-endian):
//   "MTJC" u16 version
//   u32 n, n bytes of JSON: model config, mode, tap layer, tag position,
//     optimizer step
//   u32 parameter count, then per parameter:
//     u32 name length, name, u32 ndim, u32 dims..., f32 values,
//     f32 adam m, f32 adam v
//   u32 CRC-32 of everything before it
// Values are stored as f32, so a loaded checkpoint is the saved one rounded
// to single precision; saving it again reproduces the same bytes.
std::string SerializeCheckpoint(const Checkpoint &ckpt);
Checkpoint DeserializeCheckpoint(const std::string &bytes);

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ckpt);
// Throws CorruptFile (bad magic, CRC, truncation, duplicate or missing
// parameters, wrong shapes) or VersionMismatch.
Checkpoint LoadCheckpoint(const std::filesystem::path &path);

}  // namespace mtjr

#endif  // MTJR_CHECKPOINT_H_
