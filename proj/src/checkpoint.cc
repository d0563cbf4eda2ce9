// src/checkpoint.cc

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

#include "mtjr/checkpoint.h"

#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mtjr/config-io.h"
#include "mtjr/dataset-io.h"
#include "mtjr/error.h"

namespace mtjr {

namespace {

void PutU16(std::string *out, uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>(v >> 8));
}

void PutU32(std::string *out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutF32(std::string *out, double v) {
  const float f = static_cast<float>(v);
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  PutU32(out, bits);
}

class Reader {
 public:
  Reader(const std::string &bytes, size_t end) : bytes_(bytes), end_(end) {}

  void Need(size_t n) const {
    if (pos_ + n > end_) throw Error(ErrorCode::kCorruptFile, "checkpoint is truncated");
  }
  uint16_t U16() {
    Need(2);
    const auto *p = reinterpret_cast<const unsigned char *>(bytes_.data() + pos_);
    pos_ += 2;
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
  }
  uint32_t U32() {
    Need(4);
    const auto *p = reinterpret_cast<const unsigned char *>(bytes_.data() + pos_);
    pos_ += 4;
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  }
  double F32() {
    const uint32_t bits = U32();
    float f;
    std::memcpy(&f, &bits, 4);
    return static_cast<double>(f);
  }
  std::string Bytes(size_t n) {
    Need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }

 private:
  const std::string &bytes_;
  size_t end_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Checkpoint &ckpt) {
  const Model &model = ckpt.state.model;
  const AdamState &opt = ckpt.state.optimizer;
  const auto &entries = model.params().entries();
  if (opt.m.size() != entries.size() || opt.v.size() != entries.size())
    throw Error(ErrorCode::kShapeMismatch, "optimizer state does not match parameters");

  nlohmann::ordered_json meta;
  meta["model"] = ToJson(model.config());
  meta["mode"] = ModeName(ckpt.mode);
  meta["tap_layer"] = ckpt.sharing.tap_layer;
  meta["tag_position"] = TagPositionName(ckpt.tag_position);
  meta["step"] = opt.step;
  const std::string header = meta.dump();

  std::string out(kCheckpointMagic, 4);
  PutU16(&out, kCheckpointVersion);
  PutU32(&out, static_cast<uint32_t>(header.size()));
  out += header;
  PutU32(&out, static_cast<uint32_t>(entries.size()));
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto &[name, t] = entries[i];
    PutU32(&out, static_cast<uint32_t>(name.size()));
    out += name;
    PutU32(&out, static_cast<uint32_t>(t.NumDims()));
    for (int32_t d : t.shape()) PutU32(&out, static_cast<uint32_t>(d));
    if (opt.m[i].size() != t.Size() || opt.v[i].size() != t.Size())
      throw Error(ErrorCode::kShapeMismatch, "optimizer state shape differs for " + name);
    for (double v : t.Values()) PutF32(&out, v);
    for (double v : opt.m[i]) PutF32(&out, v);
    for (double v : opt.v[i]) PutF32(&out, v);
  }
  PutU32(&out, Crc32(out.data(), out.size()));
  return out;
}

Checkpoint DeserializeCheckpoint(const std::string &bytes) {
  if (bytes.size() < 10 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0)
    throw Error(ErrorCode::kCorruptFile, "not a checkpoint (bad magic)");
  const size_t body = bytes.size() - 4;
  {
    Reader trailer(bytes, bytes.size());
    trailer.Bytes(body);
    if (trailer.U32() != Crc32(bytes.data(), body))
      throw Error(ErrorCode::kCorruptFile, "checkpoint CRC mismatch");
  }
  Reader r(bytes, body);
  r.Bytes(4);
  const uint16_t version = r.U16();
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));

  nlohmann::json meta;
  ModelConfig config;
  Checkpoint ckpt{TrainingState{Model::Empty(ModelConfig{}), AdamState{}},
                  TrainMode::kMtjr, SharingConfig{}, TagPosition::kAppend};
  try {
    meta = nlohmann::json::parse(r.Bytes(r.U32()));
    config = ModelConfigFromJson(meta.at("model"));
    config.Check();
    ckpt.mode = ModeFromName(meta.at("mode").get<std::string>());
    ckpt.sharing.tap_layer = meta.at("tap_layer").get<int32_t>();
    ckpt.tag_position = TagPositionFromName(meta.at("tag_position").get<std::string>());
    ckpt.sharing.Check(config);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kCorruptFile, std::string("bad checkpoint header: ") + e.what());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kCorruptFile) throw;
    throw Error(ErrorCode::kCorruptFile, std::string("bad checkpoint header: ") + e.what());
  }

  ckpt.state.model = Model::Empty(config);
  ParameterSet &params = ckpt.state.model.params();
  AdamState &opt = ckpt.state.optimizer;
  opt = AdamState::ForParameters(params);
  opt.step = meta.at("step").get<int64_t>();

  const uint32_t count = r.U32();
  std::set<std::string> seen;
  for (uint32_t k = 0; k < count; ++k) {
    const std::string name = r.Bytes(r.U32());
    if (!params.Contains(name))
      throw Error(ErrorCode::kCorruptFile, "unexpected parameter " + name);
    if (!seen.insert(name).second)
      throw Error(ErrorCode::kCorruptFile, "duplicate parameter " + name);
    Tensor &t = params.Get(name);
    const uint32_t ndim = r.U32();
    Shape shape;
    for (uint32_t d = 0; d < ndim; ++d) shape.push_back(static_cast<int32_t>(r.U32()));
    if (shape != t.shape())
      throw Error(ErrorCode::kCorruptFile, "parameter " + name + " has shape " +
                                               ShapeToString(shape) + ", expected " +
                                               ShapeToString(t.shape()));
    size_t index = 0;
    while (params.entries()[index].first != name) ++index;
    for (double &v : t.Values()) v = r.F32();
    for (double &v : opt.m[index]) v = r.F32();
    for (double &v : opt.v[index]) v = r.F32();
  }
  if (seen.size() != params.size())
    throw Error(ErrorCode::kCorruptFile, "checkpoint is missing parameters");
  if (r.pos() != body) throw Error(ErrorCode::kCorruptFile, "trailing bytes in checkpoint");
  return ckpt;
}

void SaveCheckpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
  const std::string bytes = SerializeCheckpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Checkpoint LoadCheckpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace mtjr
