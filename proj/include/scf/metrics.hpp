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
#include "scf/leakage.hpp"
#include "scf/trace_store.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scf::metrics {

struct TrialOutcome {
    std::uint64_t seed = 0;
    std::array<int, 16> ranks{}; // rank of the true key byte, 0..255
    aes::Key128 recovered{};
    std::uint64_t traces_used = 0;
};

/// Mean rank of the true key per byte position. Throws InsufficientData on
/// an empty outcome list.
std::array<double, 16> guessing_entropy(const std::vector<TrialOutcome> &o);

/// Guessing entropy averaged over the 16 byte positions.
double mean_guessing_entropy(const std::vector<TrialOutcome> &o);

/// Per-trial mean rank over the 16 bytes (the paired-comparison statistic).
double trial_mean_rank(const TrialOutcome &o);

/// Fraction of trials where every byte ranks at or below threshold_rank.
double success_rate(const std::vector<TrialOutcome> &o,
                    int threshold_rank = 0);

inline bool full_recovery(const TrialOutcome &o, int threshold_rank = 0) {
    for (const int r : o.ranks)
        if (r > threshold_rank)
            return false;
    return true;
}

inline int wrong_bytes(const TrialOutcome &o) {
    int w = 0;
    for (const int r : o.ranks)
        if (r > 0)
            ++w;
    return w;
}

struct NibbleDiff {
    int byte;
    bool high;
};

/// Byte- and nibble-level differences between a recovered key and the
/// truth, with a two-line hex rendering that marks differing nibbles.
struct KeyErrorMap {
    aes::Key128 recovered{};
    aes::Key128 truth{};
    std::vector<int> byte_diffs;
    std::vector<NibbleDiff> nibble_diffs;

    bool empty() const noexcept { return byte_diffs.empty(); }
    /// Two lines: truth, then the recovered key with every differing
    /// nibble wrapped in brackets (ANSI red when `ansi` is set).
    std::string render(bool ansi) const;
};

KeyErrorMap key_error_map(const aes::Key128 &recovered,
                          const aes::Key128 &truth);

/// Operation inferred from a window's mean magnitude: the op whose
/// baseline level midpoint is nearest (ties toward the lower op index).
aes::Op classify_magnitude(double window_mean) noexcept;

struct ConfusionRow {
    int slot;
    int round;
    aes::Op executed;
    int variant;
    double window_mean;
    aes::Op inferred;
    bool mismatch;
};

struct TraceConfusion {
    std::uint64_t trace_index;
    std::vector<ConfusionRow> rows;
    int mismatches;
    std::optional<bool> ciphertext_ok;
};

struct ConfusionReport {
    std::vector<TraceConfusion> traces;
    std::array<std::array<std::uint64_t, 4>, 4> matrix{}; // executed x inferred
    std::uint64_t total_slots = 0;
    std::uint64_t total_mismatches = 0;

    std::string render(std::size_t max_traces) const;
};

/// Per-slot confusion rows of one record: executed op (from the layout)
/// and variant (from the log, or 0 for an unlogged baseline) against the
/// op inferred from the slot's mean magnitude.
std::vector<ConfusionRow>
confusion_rows(const store::TraceRecord &record,
               const std::vector<leakage::OpSlot> &schedule,
               const std::vector<std::uint8_t> &variant_log);

/// Scans up to max_traces records. Swapper campaigns that were captured
/// without variant logging raise ConfigError instructing to re-run the
/// simulation with --log-variants; undefended campaigns use the implicit
/// all-zero log. When `key` is given, every record's ciphertext is checked
/// against a fresh encryption.
ConfusionReport
op_confusion_report(store::TraceSetReader &reader, std::uint64_t max_traces,
                    const std::optional<aes::Key128> &key = std::nullopt);

/// Paired arms at one campaign size. Construction asserts the arm configs
/// are identical except for the defense setting.
struct ArmSummary {
    std::string name;
    double mean_ge = 0.0;
    double success = 0.0;
    std::array<std::uint64_t, 17> wrong_byte_hist{};
};

struct DefenseComparison {
    std::uint64_t n_traces = 0;
    int trials = 0;
    ArmSummary baseline;
    ArmSummary swapper;
    int ge_wins = 0; // paired trials with swapper mean rank > baseline's
    int sr_wins = 0; // paired trials where only the baseline fully recovers

    static DefenseComparison
    make(const leakage::LeakageConfig &baseline_config,
         const std::vector<TrialOutcome> &baseline_outcomes,
         const leakage::LeakageConfig &swapper_config,
         const std::vector<TrialOutcome> &swapper_outcomes,
         std::uint64_t n_traces, int threshold_rank = 0);
};

/// True when the configs differ in nothing but the defense flag.
bool paired_configs(const leakage::LeakageConfig &a,
                    const leakage::LeakageConfig &b) noexcept;

} // namespace scf::metrics
