// src/cli.cc

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

#include "mtjr/cli.h"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mtjr/checkpoint.h"
#include "mtjr/config-io.h"
#include "mtjr/corpus.h"
#include "mtjr/dataset-io.h"
#include "mtjr/evaluate.h"
#include "mtjr/log.h"

namespace mtjr {
namespace cli {

namespace fs = std::filesystem;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonFinite:
      return kExitNumeric;
    case ErrorCode::kIo:
    case ErrorCode::kCorruptFile:
    case ErrorCode::kVersionMismatch:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

std::string Optional(const std::optional<double> &v) {
  return v ? FormatNumber(*v) : std::string();
}

std::ofstream OpenForWrite(const fs::path &path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  return out;
}

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream out = OpenForWrite(path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

// Loads a dataset directory and checks it fits the model.
Dataset LoadFor(const std::string &dir, const ModelConfig &model) {
  Dataset ds = LoadDataset(dir);
  if (ds.info.feature_dim != model.feature_dim)
    throw Error(ErrorCode::kConfig, dir + ": feature_dim " +
                                        std::to_string(ds.info.feature_dim) +
                                        " does not match the model's " +
                                        std::to_string(model.feature_dim));
  if (ds.info.accent_count != model.accent_count)
    throw Error(ErrorCode::kConfig, dir + ": accent_count does not match the model");
  if (ds.info.vocab > NumTranscriptTokens(model))
    throw Error(ErrorCode::kConfig, dir + ": vocabulary larger than the model's");
  return ds;
}

std::string ResultsCsv(const std::string &system, const std::string &split,
                       const EvalResult &r, int32_t accents) {
  return ResultsHeader(accents) + "\n" + ResultsRow(system, split, r, accents) + "\n";
}

EvalOptions EvalOptionsFor(TrainMode mode, const SharingConfig &sharing,
                           TagPosition pos, const DecodeOptions &decode) {
  EvalOptions o;
  o.mode = mode;
  o.sharing = sharing;
  o.tag_position = pos;
  o.decode = decode;
  return o;
}

void PrintSummary(const std::string &split, const Corpus &c, int32_t accents) {
  int64_t frames = 0;
  std::vector<int64_t> per(accents, 0);
  for (const Utterance &u : c) {
    frames += u.features.rows;
    ++per[u.accent_id];
  }
  // 10 ms frame shift.
  const double hours = static_cast<double>(frames) * 0.01 / 3600.0;
  std::printf("%-9s %7zu utts %8.3f h", split.c_str(), c.size(), hours);
  for (int32_t a = 0; a < accents; ++a)
    std::printf("  %s %lld", AccentName(a).c_str(), static_cast<long long>(per[a]));
  std::printf("\n");
}

struct RunResult {
  TrainOutcome outcome;
  std::optional<EvalResult> eval;
  std::string eval_split;
};

void WarnIgnoredFields(const nlohmann::json &raw, const RunConfig &rc) {
  if (rc.trainer.mode != TrainMode::kMonoAsr || !raw.contains("trainer")) return;
  const nlohmann::json &t = raw["trainer"];
  if (t.contains("loss") && t["loss"].contains("lambda"))
    MTJR_WARN << "mode mono_asr ignores trainer.loss.lambda";
  if (t.contains("sharing")) MTJR_WARN << "mode mono_asr ignores trainer.sharing";
}

// Trains per the config, writes checkpoint, metrics and (when a test or dev
// set exists) results into `out_dir`.
RunResult RunTraining(const RunConfig &rc, const fs::path &out_dir) {
  Corpus train = LoadFor(rc.data.train, rc.model).utterances;
  Corpus dev;
  if (!rc.data.dev.empty()) dev = LoadFor(rc.data.dev, rc.model).utterances;
  const TrainerConfig &tc = rc.trainer;
  fs::create_directories(out_dir);
  WriteText(out_dir / "config.json", ToJson(rc).dump(2) + "\n");

  auto on_epoch = [](const EpochMetrics &) {};
  RunResult res{TrainOutcome{InitialState(rc.model, tc.seed), {}}, std::nullopt, ""};
  if (tc.init_from) {
    const Checkpoint pre = LoadCheckpoint(*tc.init_from);
    TrainingState init = PrepareFinetune(pre.state.model, rc.model, tc.seed);
    res.outcome = Train(tc, std::move(init), train, dev, on_epoch);
  } else if (rc.pretrain) {
    Corpus od = LoadFor(rc.data.pretrain, rc.model).utterances;
    PretrainOutcome p = PretrainThenFinetune(tc, rc.model, od, train, dev, on_epoch);
    WriteMetricsCsv(out_dir / "pretrain_metrics.csv", p.pretrain.log);
    res.outcome = std::move(p.finetune);
  } else {
    res.outcome = Train(tc, InitialState(rc.model, tc.seed), train, dev, on_epoch);
  }
  WriteMetricsCsv(out_dir / "metrics.csv", res.outcome.log);
  SaveCheckpoint(out_dir / "model.ckpt",
                 Checkpoint{res.outcome.state, tc.mode, tc.sharing, tc.tag_position});

  const std::string eval_dir = !rc.data.test.empty() ? rc.data.test : rc.data.dev;
  if (!eval_dir.empty()) {
    const Dataset ds = LoadFor(eval_dir, rc.model);
    res.eval = Evaluate(res.outcome.state.model, ds.utterances,
                        EvalOptionsFor(tc.mode, tc.sharing, tc.tag_position, rc.decode));
    res.eval_split = ds.info.split;
    WriteText(out_dir / "results.csv",
              ResultsCsv(ModeName(tc.mode), res.eval_split, *res.eval, rc.model.accent_count));
  }
  return res;
}

RunConfig LoadRunConfig(const std::string &path, nlohmann::json *raw) {
  *raw = ReadJsonFile(path);
  return RunConfigFromJson(*raw);
}

DecodeOptions LoadRunConfigDecode(const std::string &path) {
  return RunConfigFromJson(ReadJsonFile(path)).decode;
}

int CmdGenData(const std::string &spec_path, const std::string &out,
               std::optional<uint64_t> seed, const std::vector<std::string> &splits) {
  SyntheticCorpusSpec spec;
  if (!spec_path.empty()) spec = CorpusSpecFromJson(ReadJsonFile(spec_path));
  if (seed) spec.seed = *seed;
  spec.Check();
  fs::create_directories(out);
  WriteText(fs::path(out) / "spec.json", ToJson(spec).dump(2) + "\n");
  for (const std::string &name : splits) {
    Split split;
    if (name == "train") split = Split::kTrain;
    else if (name == "dev") split = Split::kDev;
    else if (name == "test") split = Split::kTest;
    else if (name == "pretrain") split = Split::kOutDomain;
    else throw Error(ErrorCode::kConfig, "unknown split '" + name + "'");
    Dataset ds;
    ds.info.split = SplitName(split);
    ds.info.vocab = spec.vocab;
    ds.info.accent_count = spec.accent_count;
    ds.info.feature_dim = spec.feature_dim;
    ds.utterances = GenerateCorpus(spec, split);
    SaveDataset(fs::path(out) / name, ds);
    PrintSummary(name, ds.utterances, spec.accent_count);
  }
  return kExitOk;
}

int CmdTrain(const std::string &config_path, const std::string &init_from) {
  nlohmann::json raw;
  RunConfig rc = LoadRunConfig(config_path, &raw);
  if (!init_from.empty()) {
    rc.trainer.init_from = init_from;
    rc.pretrain = false;
  }
  WarnIgnoredFields(raw, rc);
  const RunResult r = RunTraining(rc, rc.output_dir);
  if (!r.outcome.log.empty()) {
    const EpochMetrics &last = r.outcome.log.back();
    std::printf("epoch %d total %s dev_wer %s dev_acc %s\n", last.epoch,
                FormatNumber(last.loss.total).c_str(), Optional(last.dev_wer).c_str(),
                Optional(last.dev_acc).c_str());
  }
  if (r.eval)
    std::printf("%s wer %s acc %s\n", r.eval_split.c_str(), Optional(r.eval->wer).c_str(),
                Optional(r.eval->accuracy).c_str());
  std::printf("checkpoint %s\n", (fs::path(rc.output_dir) / "model.ckpt").string().c_str());
  return kExitOk;
}

int CmdEval(const std::string &ckpt_path, const std::string &data, const std::string &out,
            const std::string &system, const std::string &config_path) {
  const Checkpoint ck = LoadCheckpoint(ckpt_path);
  DecodeOptions decode;
  if (!config_path.empty()) decode = LoadRunConfigDecode(config_path);
  const ModelConfig &mc = ck.state.model.config();
  const Dataset ds = LoadFor(data, mc);
  const EvalResult r = Evaluate(ck.state.model, ds.utterances,
                                EvalOptionsFor(ck.mode, ck.sharing, ck.tag_position, decode));
  const std::string name = system.empty() ? ModeName(ck.mode) : system;
  const std::string csv = ResultsCsv(name, ds.info.split, r, mc.accent_count);
  WriteText(out, csv);
  std::cout << csv;
  return kExitOk;
}

int CmdSweep(const std::string &config_path, const std::string &param,
             const std::vector<std::string> &values) {
  nlohmann::json raw;
  const RunConfig base = LoadRunConfig(config_path, &raw);
  WarnIgnoredFields(raw, base);
  if (param != "lambda" && param != "tap_layer")
    throw Error(ErrorCode::kConfig, "--param must be lambda or tap_layer");
  if (values.empty()) throw Error(ErrorCode::kConfig, "--values is empty");
  if (base.data.test.empty() && base.data.dev.empty())
    throw Error(ErrorCode::kConfig, "sweep needs data.test or data.dev");

  // Validate every value before any training.
  std::vector<RunConfig> runs;
  for (const std::string &v : values) {
    RunConfig rc = base;
    nlohmann::json j = ToJson(rc);
    try {
      if (param == "lambda") j["trainer"]["loss"]["lambda"] = std::stod(v);
      else j["trainer"]["sharing"]["tap_layer"] = std::stoi(v);
    } catch (const std::logic_error &) {
      throw Error(ErrorCode::kConfig, "bad sweep value '" + v + "'");
    }
    rc = RunConfigFromJson(nlohmann::json::parse(j.dump()));
    rc.output_dir = (fs::path(base.output_dir) / (param + "-" + v)).string();
    runs.push_back(std::move(rc));
  }

  const fs::path dir = base.output_dir;
  fs::create_directories(dir);
  std::ofstream table = OpenForWrite(dir / "sweep.csv");
  std::ofstream curves = OpenForWrite(dir / "sweep_curves.csv");
  table << "value,wer,acc\n";
  curves << "value," << kMetricsHeader << "\n";
  table.flush();
  curves.flush();
  for (size_t i = 0; i < runs.size(); ++i) {
    const RunResult r = RunTraining(runs[i], runs[i].output_dir);
    for (const EpochMetrics &m : r.outcome.log) curves << values[i] << "," << MetricsRow(m) << "\n";
    table << values[i] << "," << Optional(r.eval->wer) << "," << Optional(r.eval->accuracy)
          << "\n";
    table.flush();
    curves.flush();
    if (!table || !curves) throw Error(ErrorCode::kIo, "write failed in " + dir.string());
    std::printf("%s=%s wer %s acc %s\n", param.c_str(), values[i].c_str(),
                Optional(r.eval->wer).c_str(), Optional(r.eval->accuracy).c_str());
    std::fflush(stdout);
  }
  return kExitOk;
}

}  // namespace

std::string MetricsRow(const EpochMetrics &m) {
  std::ostringstream s;
  s << m.epoch << ',' << FormatNumber(m.loss.ctc) << ',' << FormatNumber(m.loss.att) << ','
    << FormatNumber(m.loss.asr) << ',' << FormatNumber(m.loss.accent) << ','
    << FormatNumber(m.loss.total) << ',' << Optional(m.dev_wer) << ',' << Optional(m.dev_acc)
    << ',' << FormatNumber(m.lr);
  return s.str();
}

void WriteMetricsCsv(const fs::path &path, std::span<const EpochMetrics> log) {
  std::string text = std::string(kMetricsHeader) + "\n";
  for (const EpochMetrics &m : log) text += MetricsRow(m) + "\n";
  WriteText(path, text);
}

std::string ResultsHeader(int32_t accent_count) {
  std::string h = "system,split,wer,acc";
  for (int32_t a = 0; a < accent_count; ++a) h += ",acc_" + AccentName(a);
  return h;
}

std::string ResultsRow(const std::string &system, const std::string &split,
                       const EvalResult &r, int32_t accent_count) {
  std::string row = system + "," + split + "," + Optional(r.wer) + "," + Optional(r.accuracy);
  for (int32_t a = 0; a < accent_count; ++a) {
    row += ",";
    if (a < static_cast<int32_t>(r.per_accent_accuracy.size()))
      row += Optional(r.per_accent_accuracy[a]);
  }
  return row;
}

int Main(int argc, char **argv) {
  CLI::App app{"Multi-task accented speech recognition toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int verbose = 1;
  app.add_option("-v,--verbose", verbose, "0 warnings only, 1 progress, 2 verbose");

  std::string spec_path, out_dir;
  std::optional<uint64_t> seed;
  std::vector<std::string> splits = {"train", "dev", "test", "pretrain"};
  CLI::App *gen = app.add_subcommand("gen-data", "Generate the synthetic corpora");
  gen->add_option("--spec", spec_path, "Corpus spec JSON (default spec when absent)");
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--seed", seed, "Override the spec seed");
  gen->add_option("--splits", splits, "Splits to write")->delimiter(',');

  std::string config_path, init_from;
  CLI::App *train = app.add_subcommand("train", "Train one model from a run config");
  train->add_option("--config", config_path, "Run config JSON")->required();
  train->add_option("--init-from", init_from, "Fine-tune from this checkpoint");

  std::string ckpt, data, out_csv, system, eval_config;
  CLI::App *eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", ckpt, "Checkpoint file")->required();
  eval->add_option("--data", data, "Dataset directory")->required();
  eval->add_option("--out", out_csv, "Results CSV")->required();
  eval->add_option("--system", system, "System label (default: the mode)");
  eval->add_option("--config", eval_config, "Run config whose decode options apply");

  std::string param;
  std::vector<std::string> values;
  CLI::App *sweep = app.add_subcommand("sweep", "Train and evaluate over one parameter");
  sweep->add_option("--config", config_path, "Run config JSON")->required();
  sweep->add_option("--param", param, "lambda or tap_layer")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  SetVerbose(verbose);

  try {
    if (*gen) return CmdGenData(spec_path, out_dir, seed, splits);
    if (*train) return CmdTrain(config_path, init_from);
    if (*eval) return CmdEval(ckpt, data, out_csv, system, eval_config);
    if (*sweep) return CmdSweep(config_path, param, values);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.code());
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace cli
}  // namespace mtjr
