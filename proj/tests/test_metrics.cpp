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
#include "scf/leakage.hpp"
#include "scf/rng.hpp"
#include "scf/trace_store.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <unistd.h>

using namespace scf;

namespace {

const aes::Key128 kKey =
    aes::parse_hex_block("000102030405060708090a0b0c0d0e0f");

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("scf_metrics_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char *name) const { return (path / name).string(); }
    static inline int counter = 0;
};

metrics::TrialOutcome outcome_with(std::array<int, 16> ranks) {
    metrics::TrialOutcome o;
    o.ranks = ranks;
    return o;
}

} // namespace

TEST_CASE("guessing entropy is the mean true-key rank") {
    std::array<int, 16> lo{};
    std::array<int, 16> hi{};
    hi.fill(255);
    const std::vector<metrics::TrialOutcome> outcomes{outcome_with(lo),
                                                      outcome_with(hi)};
    const auto ge = metrics::guessing_entropy(outcomes);
    for (const double g : ge)
        CHECK(g == 127.5);
    CHECK(metrics::mean_guessing_entropy(outcomes) == 127.5);
    CHECK(metrics::trial_mean_rank(outcomes[1]) == 255.0);

    CHECK_THROWS_AS((void)metrics::guessing_entropy({}), InsufficientData);
}

TEST_CASE("uniform random ranks average near the midpoint") {
    std::vector<metrics::TrialOutcome> outcomes;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        metrics::TrialOutcome o;
        for (int b = 0; b < 16; ++b)
            o.ranks[static_cast<std::size_t>(b)] = static_cast<int>(
                rng::at(21, static_cast<std::uint64_t>(t * 16 + b)) % 256);
        outcomes.push_back(o);
    }
    const double mean = metrics::mean_guessing_entropy(outcomes);
    // 3-sigma band: sd of a uniform byte is ~73.9, n = 8000 draws.
    const double band =
        3.0 * 73.9 / std::sqrt(static_cast<double>(trials * 16));
    CHECK(std::abs(mean - 127.5) < band);
}

TEST_CASE("success rate counts full recoveries under the threshold") {
    std::array<int, 16> perfect{};
    std::array<int, 16> close{};
    close[3] = 1;
    std::array<int, 16> bad{};
    bad[3] = 17;

    std::vector<metrics::TrialOutcome> outcomes;
    for (int i = 0; i < 3; ++i)
        outcomes.push_back(outcome_with(perfect));
    for (int i = 0; i < 5; ++i)
        outcomes.push_back(outcome_with(close));
    for (int i = 0; i < 12; ++i)
        outcomes.push_back(outcome_with(bad));

    CHECK(metrics::success_rate(outcomes, 0) == doctest::Approx(3.0 / 20.0));
    CHECK(metrics::success_rate(outcomes, 1) == doctest::Approx(8.0 / 20.0));
    CHECK(metrics::success_rate(outcomes, 255) == 1.0);

    CHECK(metrics::full_recovery(outcome_with(perfect)));
    CHECK_FALSE(metrics::full_recovery(outcome_with(close)));
    CHECK(metrics::full_recovery(outcome_with(close), 1));
    CHECK(metrics::wrong_bytes(outcome_with(close)) == 1);
    CHECK(metrics::wrong_bytes(outcome_with(perfect)) == 0);
}

TEST_CASE("key error map localizes byte and nibble differences") {
    const aes::Key128 truth =
        aes::parse_hex_block("00112233445566778899aabbccddeeff");

    SUBCASE("identical keys have an empty map") {
        const auto map = metrics::key_error_map(truth, truth);
        CHECK(map.empty());
        CHECK(map.nibble_diffs.empty());
        const std::string text = map.render(false);
        CHECK(text.find('[') == std::string::npos);
    }
    SUBCASE("high-nibble difference in byte 1") {
        aes::Key128 rec = truth;
        rec[1] = 0x71; // truth 0x11
        const auto map = metrics::key_error_map(rec, truth);
        REQUIRE(map.byte_diffs == std::vector<int>{1});
        REQUIRE(map.nibble_diffs.size() == 1);
        CHECK(map.nibble_diffs[0].byte == 1);
        CHECK(map.nibble_diffs[0].high);

        const std::string text = map.render(false);
        CHECK(text ==
              "truth:     00112233445566778899aabbccddeeff\n"
              "recovered: 00[7]12233445566778899aabbccddeeff\n");
    }
    SUBCASE("low-nibble difference") {
        aes::Key128 rec = truth;
        rec[2] = 0x2f; // truth 0x22
        const auto map = metrics::key_error_map(rec, truth);
        REQUIRE(map.nibble_diffs.size() == 1);
        CHECK_FALSE(map.nibble_diffs[0].high);
        CHECK(map.render(false).find("2[f]") != std::string::npos);
    }
    SUBCASE("both nibbles differ") {
        aes::Key128 rec = truth;
        rec[0] = 0xff; // truth 0x00
        const auto map = metrics::key_error_map(rec, truth);
        CHECK(map.nibble_diffs.size() == 2);
        CHECK(map.render(false).find("[f][f]") != std::string::npos);
    }
    SUBCASE("ansi rendering wraps in escape codes") {
        aes::Key128 rec = truth;
        rec[0] = 0x0a; // low nibble only
        const std::string text =
            metrics::key_error_map(rec, truth).render(true);
        CHECK(text.find("\x1b[31m") != std::string::npos);
        CHECK(text.find("\x1b[0m") != std::string::npos);
        CHECK(text.find('[') != std::string::npos);
    }
    SUBCASE("all sixteen bytes differ") {
        aes::Key128 rec;
        for (std::size_t b = 0; b < 16; ++b)
            rec[b] = static_cast<std::uint8_t>(~truth[b]);
        const auto map = metrics::key_error_map(rec, truth);
        CHECK(map.byte_diffs.size() == 16);
        CHECK(map.nibble_diffs.size() == 32);
    }
}

TEST_CASE("magnitude classification snaps to the nearest level midpoint") {
    // Baseline levels 10/0/20/30 give midpoints 14/4/24/34 for hw in [0,8].
    CHECK(metrics::classify_magnitude(4.0) == aes::Op::SubBytes);
    CHECK(metrics::classify_magnitude(14.0) == aes::Op::AddRoundKey);
    CHECK(metrics::classify_magnitude(24.0) == aes::Op::ShiftRows);
    CHECK(metrics::classify_magnitude(34.0) == aes::Op::MixColumns);
    CHECK(metrics::classify_magnitude(-100.0) == aes::Op::SubBytes);
    CHECK(metrics::classify_magnitude(1000.0) == aes::Op::MixColumns);
    // Equidistant between OP-1 (14) and OP-2 (4): lower op index wins.
    CHECK(metrics::classify_magnitude(9.0) == aes::Op::AddRoundKey);
}

TEST_CASE("noiseless baseline campaigns have zero confusion") {
    TempDir dir;
    leakage::LeakageConfig config;
    config.seed = 51;
    leakage::generate_campaign(dir.file("base.scf"), 32, kKey, config, {});

    store::TraceSetReader reader(dir.file("base.scf"));
    const auto report = metrics::op_confusion_report(reader, 32, kKey);
    CHECK(report.total_slots == 32 * 40);
    CHECK(report.total_mismatches == 0);
    for (const auto &trace : report.traces) {
        REQUIRE(trace.ciphertext_ok.has_value());
        CHECK(*trace.ciphertext_ok);
    }
    // Diagonal matrix: per trace, 11 whitening/round-key ops, 10 SubBytes,
    // 10 ShiftRows, 9 MixColumns.
    CHECK(report.matrix[0][0] == 32 * 11);
    CHECK(report.matrix[1][1] == 32 * 10);
    CHECK(report.matrix[2][2] == 32 * 10);
    CHECK(report.matrix[3][3] == 32 * 9);
    for (int e = 0; e < 4; ++e)
        for (int i = 0; i < 4; ++i)
            if (e != i)
                CHECK(report.matrix[static_cast<std::size_t>(e)]
                                   [static_cast<std::size_t>(i)] == 0);
}

TEST_CASE("swap defense confounds the op classifier but not the cipher") {
    TempDir dir;
    leakage::LeakageConfig config;
    config.seed = 52;
    config.defense = leakage::Defense::Swapper;
    config.log_variants = true;
    leakage::generate_campaign(dir.file("swap.scf"), 32, kKey, config, {});

    store::TraceSetReader reader(dir.file("swap.scf"));
    const auto report = metrics::op_confusion_report(reader, 32, kKey);
    CHECK(report.total_mismatches > 0);
    for (const auto &trace : report.traces)
        CHECK(*trace.ciphertext_ok);

    // Every SubBytes slot lands on a wrong op: its variants sit at range
    // midpoints 10/20/30 while its own baseline midpoint is 4.
    CHECK(report.matrix[1][1] == 0);

    const std::string text = report.render(1);
    CHECK(text.find("mismatched slots:") != std::string::npos);
    CHECK(text.find('[') != std::string::npos);
}

TEST_CASE("swapper campaigns without a variant log are rejected") {
    TempDir dir;
    leakage::LeakageConfig config;
    config.defense = leakage::Defense::Swapper;
    config.log_variants = false;
    leakage::generate_campaign(dir.file("nolog.scf"), 4, kKey, config, {});

    store::TraceSetReader reader(dir.file("nolog.scf"));
    try {
        (void)metrics::op_confusion_report(reader, 4);
        FAIL("expected ConfigError");
    } catch (const ConfigError &e) {
        CHECK(std::string(e.what()).find("--log-variants") !=
              std::string::npos);
    }
}

TEST_CASE("a single-variant swap bank is indistinguishable from baseline") {
    // Degenerate bank: one variant per op, identical to the baseline: the
    // classifier sees clean levels even through the swap machinery.
    leakage::LeakageConfig config;
    config.defense = leakage::Defense::Swapper;
    const leakage::VariantBank bank = leakage::baseline_bank();
    leakage::PufSelector sel{rng::derive(config.seed, rng::kTagPuf), 0};
    const leakage::Trace trace = leakage::synthesize_trace(
        rng::bytes16(9, 0), kKey, config, &bank, sel,
        rng::derive(config.seed, rng::kTagNoise), 0);

    store::TraceRecord rec;
    rec.plaintext = trace.plaintext;
    rec.ciphertext = trace.ciphertext;
    rec.samples = trace.samples;
    const auto rows = metrics::confusion_rows(
        rec, leakage::build_op_schedule(config),
        std::vector<std::uint8_t>(40, 0));
    REQUIRE(rows.size() == 40);
    for (const auto &row : rows) {
        CHECK_FALSE(row.mismatch);
        CHECK(row.inferred == row.executed);
    }
}

TEST_CASE("defense comparison pairs arms and counts wins") {
    leakage::LeakageConfig base;
    base.noise_sigma = 2.0;
    leakage::LeakageConfig swap = base;
    swap.defense = leakage::Defense::Swapper;

    CHECK(metrics::paired_configs(base, swap));
    leakage::LeakageConfig other = swap;
    other.noise_sigma = 3.0;
    CHECK_FALSE(metrics::paired_configs(base, other));

    std::array<int, 16> perfect{};
    std::array<int, 16> poor{};
    poor.fill(100);
    std::array<int, 16> partial{};
    partial[0] = 4;

    // Baseline recovers in trials 0 and 1; the swapper never does and has
    // a strictly higher mean rank except in trial 2 (a tie).
    std::vector<metrics::TrialOutcome> base_outcomes{
        outcome_with(perfect), outcome_with(perfect), outcome_with(poor)};
    std::vector<metrics::TrialOutcome> swap_outcomes{
        outcome_with(poor), outcome_with(partial), outcome_with(poor)};

    const auto cmp = metrics::DefenseComparison::make(base, base_outcomes,
                                                      swap, swap_outcomes,
                                                      1234, 0);
    CHECK(cmp.n_traces == 1234);
    CHECK(cmp.trials == 3);
    CHECK(cmp.baseline.success == doctest::Approx(2.0 / 3.0));
    CHECK(cmp.swapper.success == 0.0);
    CHECK(cmp.baseline.mean_ge == doctest::Approx(100.0 / 3.0));
    CHECK(cmp.ge_wins == 2); // ties are not wins
    CHECK(cmp.sr_wins == 2);
    CHECK(cmp.baseline.wrong_byte_hist[0] == 2);
    CHECK(cmp.baseline.wrong_byte_hist[16] == 1);
    CHECK(cmp.swapper.wrong_byte_hist[1] == 1);

    CHECK_THROWS_AS((void)metrics::DefenseComparison::make(
                        base, base_outcomes, other, swap_outcomes, 1234, 0),
                    ConfigError);
    swap_outcomes.pop_back();
    CHECK_THROWS_AS((void)metrics::DefenseComparison::make(
                        base, base_outcomes, swap, swap_outcomes, 1234, 0),
                    InsufficientData);
}
