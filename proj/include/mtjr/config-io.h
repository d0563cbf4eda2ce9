// mtjr/config-io.h

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

#ifndef MTJR_CONFIG_IO_H_
#define MTJR_CONFIG_IO_H_

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "mtjr/corpus.h"
#include "mtjr/evaluate.h"
#include "mtjr/losses.h"
#include "mtjr/training.h"
#include "mtjr/transformer.h"

namespace mtjr {

// Dataset directories as written by gen-data. An empty path means absent.
struct DataPaths {
  std::string train;
  std::string dev;
  std::string test;
  std::string pretrain;  // out-of-domain corpus for pretrain-then-finetune
};

// Everything one run needs, read from a single JSON document.
struct RunConfig {
  ModelConfig model;
  TrainerConfig trainer;
  DecodeOptions decode;  // for the final test evaluation
  DataPaths data;
  std::string output_dir = "exp";
  // Train with pretrain-then-finetune when data.pretrain is set.
  bool pretrain = false;
};

// All readers reject unknown keys and wrongly typed values with
// ErrorCode::kConfig; absent keys keep their defaults.
nlohmann::ordered_json ToJson(const ModelConfig &c);
nlohmann::ordered_json ToJson(const LossConfig &c);
nlohmann::ordered_json ToJson(const SharingConfig &c);
nlohmann::ordered_json ToJson(const DecodeOptions &c);
nlohmann::ordered_json ToJson(const TrainerConfig &c);
nlohmann::ordered_json ToJson(const SyntheticCorpusSpec &c);
nlohmann::ordered_json ToJson(const RunConfig &c);

ModelConfig ModelConfigFromJson(const nlohmann::json &j);
LossConfig LossConfigFromJson(const nlohmann::json &j);
SharingConfig SharingConfigFromJson(const nlohmann::json &j);
DecodeOptions DecodeOptionsFromJson(const nlohmann::json &j);
TrainerConfig TrainerConfigFromJson(const nlohmann::json &j);
SyntheticCorpusSpec CorpusSpecFromJson(const nlohmann::json &j);
// Also runs every Check(), so a returned config is valid.
RunConfig RunConfigFromJson(const nlohmann::json &j);

// Parses a file; I/O failures raise kIo, malformed JSON raises kConfig.
nlohmann::json ReadJsonFile(const std::filesystem::path &path);

}  // namespace mtjr

#endif  // MTJR_CONFIG_IO_H_
