// mtjr/rng.h

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

#ifndef MTJR_RNG_H_
#define MTJR_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace mtjr {

// Mixes a base seed with stream identifiers so that independent consumers
// (parameters, utterances, batches, epochs) draw from unrelated streams and
// adding a consumer never shifts the draws of another.
uint64_t SplitSeed(uint64_t seed, std::initializer_list<uint64_t> streams);

// FNV-1a; stable across platforms, used to turn names into stream ids.
uint64_t HashName(std::string_view name);

// Thin wrapper over mt19937_64. The distributions are written out here
// instead of using <random>'s, whose outputs differ between standard
// libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }
  // Uniform on [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer on [lo, hi] inclusive.
  int64_t UniformInt(int64_t lo, int64_t hi);
  double Normal();
  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mtjr

#endif  // MTJR_RNG_H_
