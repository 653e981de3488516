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
#include "scf/metrics.hpp"

#include "scf/errors.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace scf::metrics {

std::array<double, 16> guessing_entropy(const std::vector<TrialOutcome> &o) {
    if (o.empty())
        throw InsufficientData("guessing entropy needs at least 1 outcome");
    std::array<double, 16> ge{};
    for (const TrialOutcome &t : o)
        for (int b = 0; b < 16; ++b)
            ge[static_cast<std::size_t>(b)] +=
                t.ranks[static_cast<std::size_t>(b)];
    for (double &g : ge)
        g /= static_cast<double>(o.size());
    return ge;
}

double mean_guessing_entropy(const std::vector<TrialOutcome> &o) {
    const auto ge = guessing_entropy(o);
    double sum = 0.0;
    for (const double g : ge)
        sum += g;
    return sum / 16.0;
}

double trial_mean_rank(const TrialOutcome &o) {
    double sum = 0.0;
    for (const int r : o.ranks)
        sum += r;
    return sum / 16.0;
}

double success_rate(const std::vector<TrialOutcome> &o, int threshold_rank) {
    if (o.empty())
        throw InsufficientData("success rate needs at least 1 outcome");
    std::size_t wins = 0;
    for (const TrialOutcome &t : o)
        if (full_recovery(t, threshold_rank))
            ++wins;
    return static_cast<double>(wins) / static_cast<double>(o.size());
}

KeyErrorMap key_error_map(const aes::Key128 &recovered,
                          const aes::Key128 &truth) {
    KeyErrorMap map;
    map.recovered = recovered;
    map.truth = truth;
    for (int b = 0; b < 16; ++b) {
        const std::uint8_t r = recovered[static_cast<std::size_t>(b)];
        const std::uint8_t t = truth[static_cast<std::size_t>(b)];
        if (r == t)
            continue;
        map.byte_diffs.push_back(b);
        if ((r >> 4) != (t >> 4))
            map.nibble_diffs.push_back({b, true});
        if ((r & 0x0f) != (t & 0x0f))
            map.nibble_diffs.push_back({b, false});
    }
    return map;
}

std::string KeyErrorMap::render(bool ansi) const {
    static const char *digits = "0123456789abcdef";
    const char *mark_on = ansi ? "\x1b[31m" : "[";
    const char *mark_off = ansi ? "\x1b[0m" : "]";
    std::string truth_line = "truth:     ";
    std::string rec_line = "recovered: ";
    for (int b = 0; b < 16; ++b) {
        const std::uint8_t t = truth[static_cast<std::size_t>(b)];
        const std::uint8_t r = recovered[static_cast<std::size_t>(b)];
        truth_line += digits[t >> 4];
        truth_line += digits[t & 0x0f];
        if ((r >> 4) != (t >> 4)) {
            rec_line += mark_on;
            rec_line += digits[r >> 4];
            rec_line += mark_off;
        } else {
            rec_line += digits[r >> 4];
        }
        if ((r & 0x0f) != (t & 0x0f)) {
            rec_line += mark_on;
            rec_line += digits[r & 0x0f];
            rec_line += mark_off;
        } else {
            rec_line += digits[r & 0x0f];
        }
    }
    return truth_line + "\n" + rec_line + "\n";
}

aes::Op classify_magnitude(double window_mean) noexcept {
    aes::Op best = aes::Op::AddRoundKey;
    double best_dist = -1.0;
    for (int op = 0; op < 4; ++op) {
        // Midpoint of the unit-gain baseline band: level + mean HW of a
        // uniform byte.
        const double mid =
            leakage::baseline_level(static_cast<aes::Op>(op)) + 4.0;
        const double d = std::abs(window_mean - mid);
        if (best_dist < 0.0 || d < best_dist) {
            best_dist = d;
            best = static_cast<aes::Op>(op);
        }
    }
    return best;
}

std::vector<ConfusionRow>
confusion_rows(const store::TraceRecord &record,
               const std::vector<leakage::OpSlot> &schedule,
               const std::vector<std::uint8_t> &variant_log) {
    std::vector<ConfusionRow> rows;
    rows.reserve(schedule.size());
    for (const leakage::OpSlot &slot : schedule) {
        double sum = 0.0;
        for (int s = 0; s < slot.n_samples; ++s)
            sum += record.samples[static_cast<std::size_t>(
                slot.sample_offset + s)];
        const double mean = sum / slot.n_samples;
        const int variant =
            slot.index < static_cast<int>(variant_log.size())
                ? variant_log[static_cast<std::size_t>(slot.index)]
                : 0;
        const aes::Op inferred = classify_magnitude(mean);
        rows.push_back(ConfusionRow{slot.index, slot.round, slot.op, variant,
                                    mean, inferred, inferred != slot.op});
    }
    return rows;
}

ConfusionReport op_confusion_report(store::TraceSetReader &reader,
                                    std::uint64_t max_traces,
                                    const std::optional<aes::Key128> &key) {
    const store::TraceSetHeader &header = reader.header();
    const leakage::LeakageConfig config =
        leakage::config_from_metadata(header.metadata);
    if (config.defense == leakage::Defense::Swapper &&
        !header.has_variant_log())
        throw ConfigError(
            "confusion report needs per-op variant logs, but this swapper "
            "campaign was captured without them; re-run simulate with "
            "--log-variants");
    const std::vector<leakage::OpSlot> schedule =
        leakage::build_op_schedule(config);
    const std::vector<std::uint8_t> zero_log(
        static_cast<std::size_t>(aes::kOpCount), 0);

    ConfusionReport report;
    store::TraceRecord rec;
    std::uint64_t index = 0;
    while (index < max_traces && reader.next(rec)) {
        TraceConfusion tc;
        tc.trace_index = index;
        tc.rows = confusion_rows(
            rec, schedule,
            header.has_variant_log() ? rec.variant_log : zero_log);
        tc.mismatches = 0;
        for (const ConfusionRow &row : tc.rows) {
            report.matrix[static_cast<std::size_t>(row.executed)]
                         [static_cast<std::size_t>(row.inferred)] += 1;
            if (row.mismatch)
                ++tc.mismatches;
        }
        report.total_slots += tc.rows.size();
        report.total_mismatches += static_cast<std::uint64_t>(tc.mismatches);
        if (key)
            tc.ciphertext_ok =
                aes::encrypt_block(rec.plaintext, *key) == rec.ciphertext;
        report.traces.push_back(std::move(tc));
        ++index;
    }
    return report;
}

std::string ConfusionReport::render(std::size_t max_traces) const {
    std::ostringstream out;
    const std::size_t shown = std::min(max_traces, traces.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const TraceConfusion &tc = traces[i];
        out << "trace " << tc.trace_index;
        if (tc.ciphertext_ok)
            out << (*tc.ciphertext_ok ? "  (ciphertext ok)"
                                      : "  (CIPHERTEXT MISMATCH)");
        out << "\n  executed:";
        for (const ConfusionRow &row : tc.rows)
            out << ' ' << aes::op_name(row.executed);
        out << "\n  inferred:";
        for (const ConfusionRow &row : tc.rows) {
            if (row.mismatch)
                out << " [" << aes::op_name(row.inferred) << ']';
            else
                out << ' ' << aes::op_name(row.inferred);
        }
        out << "\n  mismatched slots: " << tc.mismatches << " of "
            << tc.rows.size() << "\n";
    }
    out << "scanned " << traces.size() << " traces, " << total_mismatches
        << " of " << total_slots << " slots inferred as a different op\n";
    out << "executed \\ inferred";
    for (int op = 0; op < 4; ++op)
        out << std::setw(8) << aes::op_name(static_cast<aes::Op>(op));
    out << '\n';
    for (int e = 0; e < 4; ++e) {
        out << std::setw(19) << aes::op_name(static_cast<aes::Op>(e));
        for (int i = 0; i < 4; ++i)
            out << std::setw(8)
                << matrix[static_cast<std::size_t>(e)]
                         [static_cast<std::size_t>(i)];
        out << '\n';
    }
    return out.str();
}

bool paired_configs(const leakage::LeakageConfig &a,
                    const leakage::LeakageConfig &b) noexcept {
    return a.model == b.model && a.hd_reference == b.hd_reference &&
           a.noise_sigma == b.noise_sigma &&
           a.samples_per_op == b.samples_per_op &&
           a.trace_length == b.trace_length && a.reselect == b.reselect &&
           a.seed == b.seed && a.log_variants == b.log_variants &&
           a.ladder == b.ladder && a.variants_per_op == b.variants_per_op &&
           a.data_gain == b.data_gain && a.span_fit == b.span_fit;
}

DefenseComparison
DefenseComparison::make(const leakage::LeakageConfig &baseline_config,
                        const std::vector<TrialOutcome> &baseline_outcomes,
                        const leakage::LeakageConfig &swapper_config,
                        const std::vector<TrialOutcome> &swapper_outcomes,
                        std::uint64_t n_traces, int threshold_rank) {
    if (!paired_configs(baseline_config, swapper_config))
        throw ConfigError(
            "defense comparison arms must share every campaign parameter "
            "except the defense flag");
    if (baseline_outcomes.size() != swapper_outcomes.size() ||
        baseline_outcomes.empty())
        throw InsufficientData(
            "defense comparison needs equally sized, non-empty arms");

    DefenseComparison cmp;
    cmp.n_traces = n_traces;
    cmp.trials = static_cast<int>(baseline_outcomes.size());

    auto summarize = [&](const std::string &name,
                         const std::vector<TrialOutcome> &outcomes) {
        ArmSummary s;
        s.name = name;
        s.mean_ge = mean_guessing_entropy(outcomes);
        s.success = success_rate(outcomes, threshold_rank);
        for (const TrialOutcome &o : outcomes)
            s.wrong_byte_hist[static_cast<std::size_t>(wrong_bytes(o))] += 1;
        return s;
    };
    cmp.baseline = summarize("none", baseline_outcomes);
    cmp.swapper = summarize("swapper", swapper_outcomes);

    for (std::size_t i = 0; i < baseline_outcomes.size(); ++i) {
        if (trial_mean_rank(swapper_outcomes[i]) >
            trial_mean_rank(baseline_outcomes[i]))
            ++cmp.ge_wins;
        if (full_recovery(baseline_outcomes[i], threshold_rank) &&
            !full_recovery(swapper_outcomes[i], threshold_rank))
            ++cmp.sr_wins;
    }
    return cmp;
}

} // namespace scf::metrics
