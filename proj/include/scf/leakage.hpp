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

#include "scf/aes.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace scf::leakage {

using aes::Block128;
using aes::Key128;
using aes::Op;

inline int hamming_weight(std::uint8_t b) noexcept { return std::popcount(b); }

inline int hamming_distance(std::uint8_t a, std::uint8_t b) noexcept {
    return hamming_weight(static_cast<std::uint8_t>(a ^ b));
}

enum class Model : std::uint8_t { HammingWeight, HammingDistance };
enum class Defense : std::uint8_t { None, Swapper };
enum class Reselect : std::uint8_t { PerTrace, PerOp };

/// One functionally identical implementation variant of an operation. Its
/// leakage is the affine map gain*hw + offset, guaranteed to land inside
/// [range_lo, range_hi] for hw in [0, 8].
struct Variant {
    double gain;
    double offset;
    double range_lo;
    double range_hi;
};

/// Per-operation variant sets. The swap defense draws uniformly among the
/// variants of each executed operation; a bank with one variant per op
/// degenerates to a fixed implementation.
struct VariantBank {
    std::array<std::vector<Variant>, 4> per_op; // indexed by Op
    std::vector<double> ladder; // the ordered rungs ranges were built from

    const std::vector<Variant> &variants(Op op) const;
};

/// Baseline power level of each operation (arbitrary units). SubBytes sits
/// at 0 so attack-window samples carry raw per-byte Hamming weight.
double baseline_level(Op op) noexcept;

/// The undefended implementation: one unit-gain variant per op at its
/// baseline level.
VariantBank baseline_bank();

/// Swap-defense bank over an ordered rung ladder: variant j of every op
/// covers [ladder[j], ladder[j+2]], so consecutive variants overlap and the
/// same ranges recur across operations. With span_fit the affine map is
/// stretched so hw 0..8 spans the whole range; otherwise data_gain is used
/// and the map is centered in the range.
VariantBank swapper_bank(const std::vector<double> &ladder,
                         int variants_per_op, double data_gain, bool span_fit);

/// Structural checks: per-op variant lists non-empty (at least 2 when used
/// as a swap defense), positive gains, range containment, consecutive
/// overlap. Throws ConfigError.
void validate_bank(const VariantBank &bank, Defense defense);

/// Deterministic stand-in for the hardware randomness source driving
/// variant selection. Pure function of (seed, counter); the counter
/// advances by one per draw.
struct PufSelector {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
};

/// Uniform variant index for `op`; advances the selector. Throws
/// ConfigError for an op label outside OP-1..OP-4.
int select_variant(const VariantBank &bank, PufSelector &selector, Op op);

inline double variant_power(const Variant &v, double hw) noexcept {
    return v.gain * hw + v.offset;
}

struct LeakageConfig {
    Model model = Model::HammingWeight;
    std::uint8_t hd_reference = 0;
    double noise_sigma = 0.0;
    int samples_per_op = 4;
    int trace_length = 200;
    Defense defense = Defense::None;
    Reselect reselect = Reselect::PerTrace;
    std::uint64_t seed = 1;
    bool log_variants = false;
    // Swapper bank parameters (resolved even when defense is none).
    std::vector<double> ladder = {0.0, 10.0, 20.0, 30.0, 40.0};
    int variants_per_op = 3;
    double data_gain = 0.1;
    bool span_fit = false;
};

/// One slot of the operation-to-sample layout.
struct OpSlot {
    int index;         // chronological op index, 0..39
    int round;
    Op op;
    int sample_offset;
    int n_samples;
    bool decomposed;   // attack slot: one sample per state byte
};

/// Chronological 40-slot layout. Every slot gets samples_per_op samples
/// except the first SubBytes (the attack point), which is decomposed into
/// 16 per-byte samples at consecutive offsets. Throws ConfigError when the
/// layout exceeds trace_length.
std::vector<OpSlot> build_op_schedule(const LeakageConfig &config);

/// Validates field ranges and the layout fit. Throws ConfigError.
void validate_config(const LeakageConfig &config);

/// Selector draws consumed per trace under `config`; worker w handling
/// traces [t0, t1) must start its selector at counter t0 * draws.
std::uint64_t selector_draws_per_trace(const LeakageConfig &config);

struct Trace {
    Block128 plaintext{};
    Block128 ciphertext{};
    std::vector<float> samples;
    std::vector<std::uint8_t> variant_log; // empty unless logging enabled
};

/// ADC-style quantization to a 1/256 grid. Keeps every accumulated sum
/// downstream exactly representable, which is what makes partition merges
/// exact and parallel runs byte-identical to serial ones.
inline double quantize_sample(double v) noexcept {
    return static_cast<double>(std::llround(v * 256.0)) / 256.0;
}

/// Synthesizes the power trace of encrypting `pt` under `key`. `bank` must
/// be the swapper bank when config.defense is Swapper; pass nullptr for the
/// baseline. Noise draw s of trace `trace_index` is addressed at counter
/// trace_index * trace_length + s of the (noise_seed) stream.
Trace synthesize_trace(const Block128 &pt, const Key128 &key,
                       const LeakageConfig &config, const VariantBank *bank,
                       PufSelector &selector, std::uint64_t noise_seed,
                       std::uint64_t trace_index);

struct PtSource {
    enum class Kind { Random, Enumerate, File };
    Kind kind = Kind::Random;
    // Enumerate: position receiving value (t+position)%256; -1 staggers all
    // 16 positions so each enumerates the full byte range while staying
    // distinguishable from its neighbours.
    int enumerate_byte = -1;
    std::string file; // raw 16-byte plaintext records
};

/// Plaintext of trace t under `source`; random bytes come from the
/// plaintext sub-stream of `config.seed`.
Block128 plaintext_for(const PtSource &source, const LeakageConfig &config,
                       std::uint64_t t);

/// Campaign metadata (model, layout, defense, seed) as the key/value map
/// embedded in the trace container. Never includes key material.
std::map<std::string, std::string>
metadata_from_config(const LeakageConfig &config, const PtSource &source);

/// Rebuilds the config recorded by metadata_from_config. Throws FormatError
/// on missing or malformed fields.
LeakageConfig
config_from_metadata(const std::map<std::string, std::string> &meta);

/// Synthesizes `n` traces and streams them to `path` in the trace
/// container format. I/O failures propagate from the store layer.
void generate_campaign(const std::string &path, std::uint64_t n,
                       const Key128 &key, const LeakageConfig &config,
                       const PtSource &source);

} // namespace scf::leakage
