// src/dataset-io.cc

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

#include "mtjr/dataset-io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "json.hpp"
#include "mtjr/error.h"

namespace mtjr {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

uint32_t Crc32(const void *data, size_t size, uint32_t crc) {
  return static_cast<uint32_t>(
      crc32(crc, static_cast<const Bytef *>(data), static_cast<uInt>(size)));
}

void SaveDataset(const std::filesystem::path &dir, const Dataset &dataset) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());

  std::string blob(kFeaturesMagic, 4);
  const uint16_t version = kDatasetVersion;
  blob.append(reinterpret_cast<const char *>(&version), sizeof(version));
  std::vector<json> records;
  records.reserve(dataset.utterances.size());
  int64_t tokens = 0;
  std::vector<int64_t> per_accent(std::max(dataset.info.accent_count, 0), 0);
  for (const Utterance &u : dataset.utterances) {
    json r;
    r["utt_id"] = u.utt_id;
    r["accent_id"] = u.accent_id;
    r["tokens"] = u.tokens;
    r["offset"] = blob.size();
    r["rows"] = u.features.rows;
    r["cols"] = u.features.cols;
    records.push_back(std::move(r));
    blob.append(reinterpret_cast<const char *>(u.features.data.data()),
                u.features.data.size() * sizeof(float));
    tokens += static_cast<int64_t>(u.tokens.size());
    if (u.accent_id >= 0 && u.accent_id < static_cast<int32_t>(per_accent.size()))
      ++per_accent[u.accent_id];
  }
  json header;
  header["format"] = "mtjr-dataset";
  header["version"] = kDatasetVersion;
  header["crc32"] = Crc32(blob.data(), blob.size());
  header["split"] = dataset.info.split;
  header["vocab"] = dataset.info.vocab;
  header["accent_count"] = dataset.info.accent_count;
  header["feature_dim"] = dataset.info.feature_dim;
  header["num_utterances"] = dataset.utterances.size();
  header["num_tokens"] = tokens;
  header["per_accent"] = per_accent;

  std::ofstream bin(dir / "features.bin", std::ios::binary | std::ios::trunc);
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream man(dir / "manifest.jsonl", std::ios::trunc);
  man << header.dump() << '\n';
  for (const json &r : records) man << r.dump() << '\n';
  if (!bin || !man) throw Error(ErrorCode::kIo, "write failed under " + dir.string());
}

namespace {

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Dataset LoadDataset(const std::filesystem::path &dir) {
  const std::string blob = ReadFile(dir / "features.bin");
  std::ifstream man(dir / "manifest.jsonl");
  if (!man) throw Error(ErrorCode::kIo, "cannot open " + (dir / "manifest.jsonl").string());

  if (blob.size() < 6 || std::memcmp(blob.data(), kFeaturesMagic, 4) != 0)
    throw Error(ErrorCode::kCorruptFile, "features.bin: bad magic");
  uint16_t version;
  std::memcpy(&version, blob.data() + 4, sizeof(version));
  if (version != kDatasetVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "features.bin version " + std::to_string(version));

  Dataset ds;
  std::string line;
  try {
    if (!std::getline(man, line)) throw Error(ErrorCode::kCorruptFile, "empty manifest");
    json header = json::parse(line);
    if (header.at("format") != "mtjr-dataset")
      throw Error(ErrorCode::kCorruptFile, "manifest: unknown format");
    if (header.at("version").get<int>() != kDatasetVersion)
      throw Error(ErrorCode::kVersionMismatch, "manifest version");
    if (header.at("crc32").get<uint32_t>() != Crc32(blob.data(), blob.size()))
      throw Error(ErrorCode::kCorruptFile, "features.bin: checksum mismatch");
    ds.info.split = header.at("split").get<std::string>();
    ds.info.vocab = header.at("vocab").get<int32_t>();
    ds.info.accent_count = header.at("accent_count").get<int32_t>();
    ds.info.feature_dim = header.at("feature_dim").get<int32_t>();
    const size_t expected = header.at("num_utterances").get<size_t>();
    ds.utterances.reserve(expected);
    while (std::getline(man, line)) {
      if (line.empty()) continue;
      json r = json::parse(line);
      Utterance u;
      u.utt_id = r.at("utt_id").get<std::string>();
      u.accent_id = r.at("accent_id").get<int32_t>();
      u.tokens = r.at("tokens").get<std::vector<int32_t>>();
      const size_t offset = r.at("offset").get<size_t>();
      u.features.rows = r.at("rows").get<int32_t>();
      u.features.cols = r.at("cols").get<int32_t>();
      const size_t count = static_cast<size_t>(u.features.rows) * u.features.cols;
      if (offset < 6 || offset + count * sizeof(float) > blob.size())
        throw Error(ErrorCode::kCorruptFile, "feature block outside features.bin");
      u.features.data.resize(count);
      std::memcpy(u.features.data.data(), blob.data() + offset, count * sizeof(float));
      ds.utterances.push_back(std::move(u));
    }
    if (ds.utterances.size() != expected)
      throw Error(ErrorCode::kCorruptFile, "manifest holds " +
                                               std::to_string(ds.utterances.size()) +
                                               " of " + std::to_string(expected) +
                                               " utterances");
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kCorruptFile, std::string("manifest: ") + e.what());
  }
  return ds;
}

}  // namespace mtjr
