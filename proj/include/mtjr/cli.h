// mtjr/cli.h

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

#ifndef MTJR_CLI_H_
#define MTJR_CLI_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtjr/error.h"
#include "mtjr/training.h"

namespace mtjr {
namespace cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitIo = 4;

int ExitCodeFor(ErrorCode code);

// Column order of the metrics log.
inline constexpr const char *kMetricsHeader =
    "epoch,ctc,att,asr,accent,total,dev_wer,dev_acc,lr";

std::string FormatNumber(double v);
std::string MetricsRow(const EpochMetrics &m);
void WriteMetricsCsv(const std::filesystem::path &path,
                     std::span<const EpochMetrics> log);

// Header of the results file: system, split, wer, acc, acc_<accent>...
std::string ResultsHeader(int32_t accent_count);
std::string ResultsRow(const std::string &system, const std::string &split,
                       const EvalResult &result, int32_t accent_count);

// Entry point of the `mtjr` tool: gen-data, train, eval, sweep.
int Main(int argc, char **argv);

}  // namespace cli
}  // namespace mtjr

#endif  // MTJR_CLI_H_
