// tests/cli-test.cc

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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mtjr/cli.h"
#include "mtjr/dataset-io.h"

namespace mtjr {

namespace fs = std::filesystem;

namespace {

int Run(std::vector<std::string> args) {
  args.insert(args.begin(), "mtjr");
  args.push_back("-v");
  args.push_back("0");
  std::vector<char *> argv;
  for (std::string &a : args) argv.push_back(a.data());
  return cli::Main(static_cast<int>(argv.size()), argv.data());
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void Write(const fs::path &p, const std::string &text) {
  std::ofstream out(p);
  out << text;
}

int CountLines(const std::string &s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

// A scratch directory holding a small generated corpus and run configs.
struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / "mtjr-cli-test";
    fs::remove_all(root);
    fs::create_directories(root);
    Write(root / "spec.json",
          R"({"train_size": 40, "dev_size": 8, "test_size": 16, "outdomain_size": 40, "seed": 4})");
    REQUIRE(Run({"gen-data", "--spec", (root / "spec.json").string(), "--out",
                 (root / "data").string()}) == 0);
  }
  ~Workspace() { fs::remove_all(root); }

  fs::path Config(const std::string &name, const std::string &mode, const std::string &extra = "") {
    const fs::path d = root / "data";
    std::ostringstream j;
    j << R"({"model": {"d_model": 16, "heads": 2, "enc_layers": 2, "dec_layers": 1, "ffn_dim": 24},)"
      << R"("trainer": {"mode": ")" << mode
      << R"(", "epochs": 2, "batch_size": 8, "warmup_steps": 20, "noam_factor": 0.3,)"
      << R"( "sharing": {"tap_layer": 2}, "dev_limit": 4)" << extra << "},"
      << R"("decode": {"beam": 2},)"
      << R"("data": {"train": ")" << (d / "train").string() << R"(", "dev": ")"
      << (d / "dev").string() << R"(", "test": ")" << (d / "test").string()
      << R"(", "pretrain": ")" << (d / "pretrain").string() << R"("},)"
      << R"("output_dir": ")" << (root / name).string() << R"("})";
    const fs::path p = root / (name + ".json");
    Write(p, j.str());
    return p;
  }
};

Workspace &Shared() {
  static Workspace ws;
  return ws;
}

}  // namespace

TEST_CASE("exit code mapping") {
  CHECK(cli::ExitCodeFor(ErrorCode::kConfig) == 2);
  CHECK(cli::ExitCodeFor(ErrorCode::kNonFinite) == 3);
  CHECK(cli::ExitCodeFor(ErrorCode::kIo) == 4);
  CHECK(cli::ExitCodeFor(ErrorCode::kCorruptFile) == 4);
  CHECK(Run({"frobnicate"}) == 2);
  CHECK(Run({"train"}) == 2);
  CHECK(Run({"train", "--config", "/nonexistent/run.json"}) == 4);
}

TEST_CASE("gen-data is deterministic and summarized") {
  Workspace &ws = Shared();
  const fs::path again = ws.root / "data2";
  REQUIRE(Run({"gen-data", "--spec", (ws.root / "spec.json").string(), "--out", again.string()}) == 0);
  for (const char *split : {"train", "dev", "test", "pretrain"}) {
    CAPTURE(split);
    CHECK(Slurp(ws.root / "data" / split / "features.bin") == Slurp(again / split / "features.bin"));
    CHECK(Slurp(ws.root / "data" / split / "manifest.jsonl") ==
          Slurp(again / split / "manifest.jsonl"));
  }
  // Manifest: one header line plus one line per utterance.
  CHECK(CountLines(Slurp(again / "train" / "manifest.jsonl")) == 41);
  const Dataset test = LoadDataset(again / "test");
  CHECK(test.utterances.size() == 16);
  CHECK(test.info.split == "test");

  Write(ws.root / "bad-spec.json", R"({"train_size": -3})");
  CHECK(Run({"gen-data", "--spec", (ws.root / "bad-spec.json").string(), "--out",
             (ws.root / "x").string()}) == 2);
  Write(ws.root / "typo-spec.json", R"({"trian_size": 3})");
  CHECK(Run({"gen-data", "--spec", (ws.root / "typo-spec.json").string(), "--out",
             (ws.root / "x").string()}) == 2);
  fs::remove_all(again);
}

TEST_CASE("train and eval") {
  Workspace &ws = Shared();
  const fs::path cfg = ws.Config("mt", "mtjr");
  REQUIRE(Run({"train", "--config", cfg.string()}) == 0);
  const std::string ckpt = Slurp(ws.root / "mt" / "model.ckpt");
  const std::string metrics = Slurp(ws.root / "mt" / "metrics.csv");
  CHECK(metrics.rfind("epoch,ctc,att,asr,accent,total,dev_wer,dev_acc,lr\n", 0) == 0);
  CHECK(CountLines(metrics) == 3);

  // Same config, same bytes.
  REQUIRE(Run({"train", "--config", cfg.string()}) == 0);
  CHECK(Slurp(ws.root / "mt" / "model.ckpt") == ckpt);
  CHECK(Slurp(ws.root / "mt" / "metrics.csv") == metrics);

  const fs::path out = ws.root / "mt" / "eval.csv";
  REQUIRE(Run({"eval", "--checkpoint", (ws.root / "mt" / "model.ckpt").string(), "--data",
               (ws.root / "data" / "test").string(), "--out", out.string(), "--config",
               cfg.string()}) == 0);
  const std::string csv = Slurp(out);
  CHECK(csv.rfind("system,split,wer,acc,acc_US,acc_UK,acc_CHN,acc_IND,acc_JPN,acc_KR,acc_PT,acc_RU\n",
                  0) == 0);
  CHECK(csv == Slurp(ws.root / "mt" / "results.csv"));
  REQUIRE(Run({"eval", "--checkpoint", (ws.root / "mt" / "model.ckpt").string(), "--data",
               (ws.root / "data" / "test").string(), "--out", out.string(), "--config",
               cfg.string()}) == 0);
  CHECK(Slurp(out) == csv);

  // Fine-tuning from the checkpoint.
  const fs::path ft = ws.Config("ft", "mtjr");
  CHECK(Run({"train", "--config", ft.string(), "--init-from",
             (ws.root / "mt" / "model.ckpt").string()}) == 0);
  CHECK(fs::exists(ws.root / "ft" / "model.ckpt"));

  CHECK(Run({"eval", "--checkpoint", (ws.root / "missing.ckpt").string(), "--data",
             (ws.root / "data" / "test").string(), "--out", out.string()}) == 4);
}

TEST_CASE("mono_ar results leave wer empty") {
  Workspace &ws = Shared();
  REQUIRE(Run({"train", "--config", ws.Config("ar", "mono_ar").string()}) == 0);
  const std::string csv = Slurp(ws.root / "ar" / "results.csv");
  const std::string row = csv.substr(csv.find('\n') + 1);
  CHECK(row.rfind("mono_ar,test,,", 0) == 0);
}

TEST_CASE("pretrain then finetune writes both logs") {
  Workspace &ws = Shared();
  const fs::path cfg = ws.Config("pt", "mtjr", R"(, "pretrain_epochs": 1)");
  std::string text = Slurp(cfg);
  text.insert(text.rfind('}'), R"(, "pretrain": true)");
  Write(cfg, text);
  REQUIRE(Run({"train", "--config", cfg.string()}) == 0);
  CHECK(CountLines(Slurp(ws.root / "pt" / "pretrain_metrics.csv")) == 2);
  CHECK(CountLines(Slurp(ws.root / "pt" / "metrics.csv")) == 3);
}

TEST_CASE("sweep") {
  Workspace &ws = Shared();
  const fs::path cfg = ws.Config("sw", "mtjr");
  REQUIRE(Run({"sweep", "--config", cfg.string(), "--param", "tap_layer", "--values", "1,2"}) == 0);
  const std::string table = Slurp(ws.root / "sw" / "sweep.csv");
  CHECK(CountLines(table) == 3);
  CHECK(table.rfind("value,wer,acc\n1,", 0) == 0);
  CHECK(CountLines(Slurp(ws.root / "sw" / "sweep_curves.csv")) == 1 + 2 * 2);
  CHECK(fs::exists(ws.root / "sw" / "tap_layer-2" / "model.ckpt"));

  // lambda = 0 reproduces mono_asr.
  const fs::path lam = ws.Config("lam", "mtjr");
  REQUIRE(Run({"sweep", "--config", lam.string(), "--param", "lambda", "--values", "0"}) == 0);
  REQUIRE(Run({"train", "--config", ws.Config("asr", "mono_asr").string()}) == 0);
  const std::string sweep_row = Slurp(ws.root / "lam" / "sweep.csv");
  const std::string asr = Slurp(ws.root / "asr" / "results.csv");
  const std::string asr_row = asr.substr(asr.find('\n') + 1);
  const std::string wer_sweep = sweep_row.substr(sweep_row.find("\n0,") + 3);
  const std::string wer_asr = asr_row.substr(std::string("mono_asr,test,").size());
  CHECK(wer_sweep.substr(0, wer_sweep.find(',')) == wer_asr.substr(0, wer_asr.find(',')));

  CHECK(Run({"sweep", "--config", cfg.string(), "--param", "tap_layer", "--values", "9"}) == 2);
  CHECK(Run({"sweep", "--config", cfg.string(), "--param", "heads", "--values", "1"}) == 2);
}

}  // namespace mtjr
