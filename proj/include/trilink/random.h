// Copyright 2026 The trilink Authors
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

#ifndef TRILINK_RANDOM_H_
#define TRILINK_RANDOM_H_

#include <array>
#include <cstdint>
#include <limits>

namespace trilink {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: maps a
/// 128-bit counter and 64-bit key to 128 random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to turn user seeds into Philox keys.
std::uint64_t splitmix64(std::uint64_t x);

/// Domain tag in the Philox counter so that streams for different purposes
/// never overlap even when they share a seed and an index.
enum class StreamPurpose : std::uint32_t {
    kSignal = 1,
    kDark = 2,
    kBootstrap = 3,
    kScanPoint = 4,
    kTest = 0xfeed,
};

/// Counter-based random stream keyed by (seed, purpose, index). Two streams
/// built from the same triple produce identical output regardless of which
/// thread drives them or in what order. Satisfies UniformRandomBitGenerator.
class RandomStream {
   public:
    using result_type = std::uint32_t;

    RandomStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    std::uint64_t next_u64();
    /// Uniform on (0, 1], 53 bits.
    double uniform_pos();
    /// Uniform on [0, 1), 53 bits.
    double uniform();

   private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
};

/// Thermal (geometric) count with the given mean; P(n) = N^n / (1 + N)^(n+1).
std::int64_t sample_thermal(RandomStream &rng, double mean);
/// Sum of `modes` independent thermal counts of the given mean each.
std::int64_t sample_multithermal(RandomStream &rng, double mean, std::int64_t modes);
std::int64_t sample_binomial(RandomStream &rng, std::int64_t n, double p);
std::int64_t sample_poisson(RandomStream &rng, double mean);
/// Standard normal via Box-Muller; consumes two uniforms per call.
double sample_normal(RandomStream &rng);

}  // namespace trilink

#endif  // TRILINK_RANDOM_H_
