// Copyright 2026 The smoothcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SMOOTHCERT_RNG_H_
#define SMOOTHCERT_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <span>

namespace smoothcert {

// SplitMix64 finalizer; also used to derive substream seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Collapses (master seed, index path) into one substream seed. Workers that
// derive their streams this way never share state, so results do not depend
// on scheduling.
std::uint64_t substream_seed(std::uint64_t master,
                             std::initializer_list<std::uint64_t> path);

// xoshiro256++ with SplitMix64 seeding. Gaussian draws use Box-Muller with a
// cached spare, so draw order is fully determined by the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  static Rng substream(std::uint64_t master,
                       std::initializer_list<std::uint64_t> path) {
    return Rng(substream_seed(master, path));
  }

  std::uint64_t next_u64();

  // Uniform on [0, 1).
  double next_double();

  // Uniform on (0, 1]; safe as a log() argument.
  double next_double_positive();

  double next_gaussian();
  void fill_gaussian(std::span<double> out);

  // Uniform direction on the unit sphere (normalized Gaussian vector).
  void fill_unit_direction(std::span<double> out);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace smoothcert

#endif  // SMOOTHCERT_RNG_H_
