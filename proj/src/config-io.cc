// src/config-io.cc

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

#include "mtjr/config-io.h"

#include <fstream>
#include <set>
#include <sstream>

#include "mtjr/error.h"

namespace mtjr {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Reads fields of one JSON object, remembering which keys were used so the
// leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const json &j, std::string context)
      : j_(j), context_(std::move(context)) {
    if (!j_.is_object())
      throw Error(ErrorCode::kConfig, context_ + " must be a JSON object");
  }

  template <typename T>
  void Get(const char *key, T *out) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    try {
      *out = it->template get<T>();
    } catch (const json::exception &) {
      throw Error(ErrorCode::kConfig, "bad value for " + Path(key) + ": " + it->dump());
    }
  }

  template <typename T, typename Parse>
  void GetWith(const char *key, T *out, Parse parse) {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    seen_.insert(key);
    *out = parse(*it, Path(key));
  }

  void Finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        throw Error(ErrorCode::kConfig, "unknown key " + Path(it.key()));
  }

  std::string Path(const std::string &key) const {
    return context_.empty() ? key : context_ + "." + key;
  }

 private:
  const json &j_;
  std::string context_;
  std::set<std::string> seen_;
};

std::string AsString(const json &j, const std::string &path) {
  if (!j.is_string()) throw Error(ErrorCode::kConfig, path + " must be a string");
  return j.get<std::string>();
}

// Re-raises parse errors of enum names as config errors.
template <typename F>
auto ParseName(const json &j, const std::string &path, F f) {
  const std::string s = AsString(j, path);
  try {
    return f(s);
  } catch (const Error &) {
    throw Error(ErrorCode::kConfig, "bad value for " + path + ": " + s);
  }
}

template <typename F>
void Checked(F f) {
  try {
    f();
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, e.message());
  }
}

}  // namespace

ordered_json ToJson(const ModelConfig &c) {
  ordered_json j;
  j["d_model"] = c.d_model;
  j["heads"] = c.heads;
  j["enc_layers"] = c.enc_layers;
  j["dec_layers"] = c.dec_layers;
  j["ffn_dim"] = c.ffn_dim;
  j["dropout"] = c.dropout;
  j["vocab_size"] = c.vocab_size;
  j["accent_count"] = c.accent_count;
  j["subsample_factor"] = c.subsample_factor;
  j["feature_dim"] = c.feature_dim;
  return j;
}

ModelConfig ModelConfigFromJson(const json &j) {
  ModelConfig c;
  ObjectReader r(j, "model");
  r.Get("d_model", &c.d_model);
  r.Get("heads", &c.heads);
  r.Get("enc_layers", &c.enc_layers);
  r.Get("dec_layers", &c.dec_layers);
  r.Get("ffn_dim", &c.ffn_dim);
  r.Get("dropout", &c.dropout);
  r.Get("vocab_size", &c.vocab_size);
  r.Get("accent_count", &c.accent_count);
  r.Get("subsample_factor", &c.subsample_factor);
  r.Get("feature_dim", &c.feature_dim);
  r.Finish();
  return c;
}

ordered_json ToJson(const LossConfig &c) {
  ordered_json j;
  j["beta"] = c.beta;
  j["lambda"] = c.lambda;
  j["gamma"] = c.gamma;
  j["label_smoothing"] = c.label_smoothing;
  return j;
}

LossConfig LossConfigFromJson(const json &j) {
  LossConfig c;
  ObjectReader r(j, "trainer.loss");
  r.Get("beta", &c.beta);
  r.Get("lambda", &c.lambda);
  r.Get("gamma", &c.gamma);
  r.Get("label_smoothing", &c.label_smoothing);
  r.Finish();
  return c;
}

ordered_json ToJson(const SharingConfig &c) {
  ordered_json j;
  j["tap_layer"] = c.tap_layer;
  return j;
}

SharingConfig SharingConfigFromJson(const json &j) {
  SharingConfig c;
  ObjectReader r(j, "trainer.sharing");
  r.Get("tap_layer", &c.tap_layer);
  r.Finish();
  return c;
}

ordered_json ToJson(const DecodeOptions &c) {
  ordered_json j;
  j["beam"] = c.beam;
  j["max_len_ratio"] = c.max_len_ratio;
  j["ctc_weight"] = c.ctc_weight;
  return j;
}

DecodeOptions DecodeOptionsFromJson(const json &j) {
  DecodeOptions c;
  ObjectReader r(j, "decode");
  r.Get("beam", &c.beam);
  r.Get("max_len_ratio", &c.max_len_ratio);
  r.Get("ctc_weight", &c.ctc_weight);
  r.Finish();
  return c;
}

ordered_json ToJson(const TrainerConfig &c) {
  ordered_json j;
  j["mode"] = ModeName(c.mode);
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["loss"] = ToJson(c.loss);
  j["sharing"] = ToJson(c.sharing);
  if (c.init_from) j["init_from"] = *c.init_from;
  j["seed"] = c.seed;
  ordered_json aug;
  aug["spec_augment"] = c.augmentation.spec_augment;
  aug["time_masks"] = c.augmentation.policy.n_time_masks;
  aug["max_time_width"] = c.augmentation.policy.max_time_width;
  aug["freq_masks"] = c.augmentation.policy.n_freq_masks;
  aug["max_freq_width"] = c.augmentation.policy.max_freq_width;
  aug["speed_perturb"] = c.augmentation.speed_perturb;
  aug["speed_factors"] = c.augmentation.speed_factors;
  j["augmentation"] = aug;
  j["noam_factor"] = c.noam_factor;
  j["warmup_steps"] = c.warmup_steps;
  j["grad_clip"] = c.grad_clip;
  j["tag_position"] = TagPositionName(c.tag_position);
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["dev_each_epoch"] = c.dev_each_epoch;
  j["dev_limit"] = c.dev_limit;
  j["dev_decode"] = ToJson(c.dev_decode);
  return j;
}

TrainerConfig TrainerConfigFromJson(const json &j) {
  TrainerConfig c;
  ObjectReader r(j, "trainer");
  r.GetWith("mode", &c.mode, [](const json &v, const std::string &p) {
    return ParseName(v, p, ModeFromName);
  });
  r.Get("epochs", &c.epochs);
  r.Get("batch_size", &c.batch_size);
  r.GetWith("loss", &c.loss,
            [](const json &v, const std::string &) { return LossConfigFromJson(v); });
  r.GetWith("sharing", &c.sharing,
            [](const json &v, const std::string &) { return SharingConfigFromJson(v); });
  r.GetWith("init_from", &c.init_from,
            [](const json &v, const std::string &p) -> std::optional<std::string> {
              if (v.is_null()) return std::nullopt;
              return AsString(v, p);
            });
  r.Get("seed", &c.seed);
  r.GetWith("augmentation", &c.augmentation,
            [](const json &v, const std::string &) {
              AugmentationConfig a;
              ObjectReader ar(v, "trainer.augmentation");
              ar.Get("spec_augment", &a.spec_augment);
              ar.Get("time_masks", &a.policy.n_time_masks);
              ar.Get("max_time_width", &a.policy.max_time_width);
              ar.Get("freq_masks", &a.policy.n_freq_masks);
              ar.Get("max_freq_width", &a.policy.max_freq_width);
              ar.Get("speed_perturb", &a.speed_perturb);
              ar.Get("speed_factors", &a.speed_factors);
              ar.Finish();
              return a;
            });
  r.Get("noam_factor", &c.noam_factor);
  r.Get("warmup_steps", &c.warmup_steps);
  r.Get("grad_clip", &c.grad_clip);
  r.GetWith("tag_position", &c.tag_position, [](const json &v, const std::string &p) {
    return ParseName(v, p, TagPositionFromName);
  });
  r.Get("pretrain_epochs", &c.pretrain_epochs);
  r.Get("dev_each_epoch", &c.dev_each_epoch);
  r.Get("dev_limit", &c.dev_limit);
  r.GetWith("dev_decode", &c.dev_decode,
            [](const json &v, const std::string &) { return DecodeOptionsFromJson(v); });
  r.Finish();
  return c;
}

ordered_json ToJson(const SyntheticCorpusSpec &c) {
  ordered_json j;
  j["vocab"] = c.vocab;
  j["accent_count"] = c.accent_count;
  j["feature_dim"] = c.feature_dim;
  j["frames_per_token"] = c.frames_per_token;
  j["min_tokens"] = c.min_tokens;
  j["max_tokens"] = c.max_tokens;
  j["prototype_std"] = c.prototype_std;
  j["noise_std"] = c.noise_std;
  j["accent_strength"] = c.accent_strength;
  j["accent_bias_std"] = c.accent_bias_std;
  j["outdomain_accent_strength"] = c.outdomain_accent_strength;
  j["train_size"] = c.train_size;
  j["dev_size"] = c.dev_size;
  j["test_size"] = c.test_size;
  j["outdomain_size"] = c.outdomain_size;
  j["seed"] = c.seed;
  return j;
}

SyntheticCorpusSpec CorpusSpecFromJson(const json &j) {
  SyntheticCorpusSpec c;
  ObjectReader r(j, "spec");
  r.Get("vocab", &c.vocab);
  r.Get("accent_count", &c.accent_count);
  r.Get("feature_dim", &c.feature_dim);
  r.Get("frames_per_token", &c.frames_per_token);
  r.Get("min_tokens", &c.min_tokens);
  r.Get("max_tokens", &c.max_tokens);
  r.Get("prototype_std", &c.prototype_std);
  r.Get("noise_std", &c.noise_std);
  r.Get("accent_strength", &c.accent_strength);
  r.Get("accent_bias_std", &c.accent_bias_std);
  r.Get("outdomain_accent_strength", &c.outdomain_accent_strength);
  r.Get("train_size", &c.train_size);
  r.Get("dev_size", &c.dev_size);
  r.Get("test_size", &c.test_size);
  r.Get("outdomain_size", &c.outdomain_size);
  r.Get("seed", &c.seed);
  r.Finish();
  Checked([&] { c.Check(); });
  return c;
}

ordered_json ToJson(const RunConfig &c) {
  ordered_json j;
  j["model"] = ToJson(c.model);
  j["trainer"] = ToJson(c.trainer);
  j["decode"] = ToJson(c.decode);
  ordered_json d;
  d["train"] = c.data.train;
  d["dev"] = c.data.dev;
  d["test"] = c.data.test;
  d["pretrain"] = c.data.pretrain;
  j["data"] = d;
  j["output_dir"] = c.output_dir;
  j["pretrain"] = c.pretrain;
  return j;
}

RunConfig RunConfigFromJson(const json &j) {
  RunConfig c;
  ObjectReader r(j, "");
  r.GetWith("model", &c.model,
            [](const json &v, const std::string &) { return ModelConfigFromJson(v); });
  r.GetWith("trainer", &c.trainer,
            [](const json &v, const std::string &) { return TrainerConfigFromJson(v); });
  r.GetWith("decode", &c.decode,
            [](const json &v, const std::string &) { return DecodeOptionsFromJson(v); });
  r.GetWith("data", &c.data, [](const json &v, const std::string &) {
    DataPaths d;
    ObjectReader dr(v, "data");
    dr.Get("train", &d.train);
    dr.Get("dev", &d.dev);
    dr.Get("test", &d.test);
    dr.Get("pretrain", &d.pretrain);
    dr.Finish();
    return d;
  });
  r.Get("output_dir", &c.output_dir);
  r.Get("pretrain", &c.pretrain);
  r.Finish();
  Checked([&] {
    c.model.Check();
    c.trainer.Check(c.model);
  });
  if (c.decode.beam < 1 || !(c.decode.max_len_ratio > 0.0) || c.decode.ctc_weight < 0.0 ||
      c.decode.ctc_weight > 1.0)
    throw Error(ErrorCode::kConfig, "decode needs beam >= 1, max_len_ratio > 0, "
                                    "ctc_weight in [0, 1]");
  if (c.pretrain && c.data.pretrain.empty())
    throw Error(ErrorCode::kConfig, "pretrain is set but data.pretrain is empty");
  return c;
}

json ReadJsonFile(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error &e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
}

}  // namespace mtjr
