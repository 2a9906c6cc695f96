// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PREFCACHE_RANDOM_H_
#define PREFCACHE_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace prefcache {

// Derives an independent stream seed from a parent seed and a stream id.
// Uses the SplitMix64 finalizer, so nearby ids give unrelated streams.
uint64_t DeriveSeed(uint64_t seed, uint64_t stream);

// Seeded generator with platform-independent conversions. The standard
// distributions are implementation-defined, so all draws go through the raw
// 64-bit engine output instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t UniformInt(uint64_t n);

  // M distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<int> SampleWithoutReplacement(int n, int m);

 private:
  std::mt19937_64 engine_;
};

}  // namespace prefcache

#endif  // PREFCACHE_RANDOM_H_
