// mtjr/dataset-io.h

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

#ifndef MTJR_DATASET_IO_H_
#define MTJR_DATASET_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "mtjr/corpus.h"

namespace mtjr {

inline constexpr char kFeaturesMagic[4] = {'M', 'T', 'J', 'R'};
inline constexpr uint16_t kDatasetVersion = 1;

struct DatasetInfo {
  std::string split;
  int32_t vocab = 0;
  int32_t accent_count = 0;
  int32_t feature_dim = 0;
};

struct Dataset {
  DatasetInfo info;
  Corpus utterances;
};

// A dataset directory holds
//   manifest.jsonl  header line {format, version, crc32, counts, ...}, then
//                   one {utt_id, accent_id, tokens, offset, rows, cols} per
//                   utterance
//   features.bin    "MTJR", u16 version, then each utterance's row-major
//                   little-endian float32 block at its byte offset.
// The crc32 covers all of features.bin.
void SaveDataset(const std::filesystem::path &dir, const Dataset &dataset);

// Throws CorruptFile (bad magic, size, checksum or manifest) or
// VersionMismatch.
Dataset LoadDataset(const std::filesystem::path &dir);

uint32_t Crc32(const void *data, size_t size, uint32_t crc = 0);

}  // namespace mtjr

#endif  // MTJR_DATASET_IO_H_
