/*
 * SPDX-FileCopyrightText: <text>Copyright 2026 The scforge authors</text>
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * This file is part of scforge, a side-channel analysis workbench.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based randomness. Every draw is addressed as (seed, counter), so
// any consumer can be evaluated at a random position of its stream. That is
// what makes trace synthesis embarrassingly parallel while staying
// byte-identical to a serial run: workers own disjoint counter ranges
// instead of sharing mutable generator state.

namespace scf::rng {

inline constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Value number `counter` of the splitmix64 stream started at `seed`.
constexpr std::uint64_t at(std::uint64_t seed, std::uint64_t counter) noexcept {
    return mix64(seed + (counter + 1) * kGamma);
}

// Domain separation tags: one master seed fans out into independent
// sub-streams for plaintexts, noise, variant selection, and key material.
inline constexpr std::uint64_t kTagPlaintext = 0x70743a7374726d00ULL;
inline constexpr std::uint64_t kTagNoise = 0x6e6f3a7374726d00ULL;
inline constexpr std::uint64_t kTagPuf = 0x70753a7374726d00ULL;
inline constexpr std::uint64_t kTagKey = 0x6b793a7374726d00ULL;
inline constexpr std::uint64_t kTagTrial = 0x74723a7374726d00ULL;

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept {
    return at(seed ^ tag, 0);
}

/// Seed for trial `trial` of sweep cell `cell` under `master`. Two nested
/// counter hashes keep cells and trials on independent streams; paired
/// defense arms reuse the same trial seed so they differ only in the
/// defense flag.
constexpr std::uint64_t trial_seed(std::uint64_t master, std::uint64_t cell,
                                   std::uint64_t trial) noexcept {
    return at(at(master ^ kTagTrial, cell), trial);
}

/// Uniform integer in [0, n) by multiply-shift reduction.
constexpr std::uint32_t bounded(std::uint64_t word, std::uint32_t n) noexcept {
    return static_cast<std::uint32_t>(
        (static_cast<unsigned __int128>(word) * n) >> 64);
}

/// Map a word to [0, 1).
constexpr double unit_open(std::uint64_t word) noexcept {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

/// Map a word to (0, 1]; safe as a log() argument.
constexpr double unit_closed(std::uint64_t word) noexcept {
    return static_cast<double>((word >> 11) + 1) * 0x1.0p-53;
}

/// Draw k of the standard normal stream (seed, k), via Box-Muller over the
/// counter pair (2k, 2k+1).
inline double normal(std::uint64_t seed, std::uint64_t k) noexcept {
    const double u1 = unit_closed(at(seed, 2 * k));
    const double u2 = unit_open(at(seed, 2 * k + 1));
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.2831853071795864769 * u2);
}

/// 16 bytes from draws (2*index, 2*index+1), little-endian.
inline std::array<std::uint8_t, 16> bytes16(std::uint64_t seed,
                                            std::uint64_t index) noexcept {
    std::array<std::uint8_t, 16> out{};
    const std::uint64_t w[2] = {at(seed, 2 * index), at(seed, 2 * index + 1)};
    for (int i = 0; i < 16; ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(w[i / 8] >> (8 * (i % 8)));
    return out;
}

} // namespace scf::rng
