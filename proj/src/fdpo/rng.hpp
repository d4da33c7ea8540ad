#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2026 the fdpo authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include <cstdint>
#include <random>

namespace fdpo {

/// Seeded generator with hand-rolled uniform/normal transforms. std::mt19937_64
/// output is pinned by the standard and Box-Muller is written out explicitly,
/// so identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t nextU64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform()
  {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double normal();

  /// Uniform integer in [0, n).
  std::uint32_t below(std::uint32_t n)
  {
    return static_cast<std::uint32_t>(engine_() % n);
  }

  /// Decorrelated child seed for a named sub-stream (splitmix64 finalizer).
  static std::uint64_t deriveSeed(std::uint64_t base, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fdpo
