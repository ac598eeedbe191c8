// Copyright 2026 The QCPMD Authors
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
/**
 * @file random.hpp
 * Counter-based random streams. A stream is identified by a 64-bit key that
 * is derived from the global seed and a tuple of indices (step, estimator
 * tag, term, ...), so every draw is a pure function of its coordinates and
 * never of scheduling order.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace qcpmd {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31U);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Hash a seed and an ordered list of coordinates into a stream key.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = mix64(seed + kGoldenGamma);
    for (std::uint64_t c : coords) {
        h = mix64(h ^ mix64(c + kGoldenGamma));
    }
    return h;
}

/**
 * @brief Keyed counter stream: the n-th output is mix64(key + n * gamma).
 *
 * Satisfies UniformRandomBitGenerator so it can drive <random>
 * distributions, but the library only uses its own uniform() / normal()
 * so that bit patterns do not depend on the standard library vendor.
 */
class CounterStream {
  public:
    using result_type = std::uint64_t;

    explicit CounterStream(std::uint64_t key) : key_{key} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        ++counter_;
        return mix64(key_ + counter_ * kGoldenGamma);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11U) * 0x1.0p-53; }

    /// Standard normal variate (Box-Muller, both halves used).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    [[nodiscard]] std::uint64_t key() const { return key_; }
    [[nodiscard]] std::uint64_t position() const { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace qcpmd
