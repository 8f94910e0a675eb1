// Copyright 2026 The bellsim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace bellsim::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// One splitmix64 step. Advances `state` and returns the next output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Folds a salt into a seed. The same (seed, salts...) always yields the
/// same derived seed, on every platform.
inline std::uint64_t absorb(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (salt + kGolden + (seed << 6) + (seed >> 2));
  return splitmix64(s);
}

template <typename... Salts>
std::uint64_t derive_seed(std::uint64_t seed, Salts... salts) {
  ((seed = absorb(seed, static_cast<std::uint64_t>(salts))), ...);
  return seed;
}

/// Counter-based splitmix64 stream with uniform/normal/discrete draws.
/// All outputs are fully determined by the construction seed and the
/// sequence of calls; no platform-dependent library distributions.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}

  template <typename... Salts>
  static Stream derived(std::uint64_t seed, Salts... salts) {
    return Stream(derive_seed(seed, salts...));
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double phi = 2.0 * M_PI * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  /// Index sampled according to `weights` (need not be normalized).
  int sample_discrete(std::span<const double> weights) {
    if (weights.empty()) {
      throw std::invalid_argument("sample_discrete: empty weight vector");
    }
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size() - 1);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bellsim::rng
