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
#include "scf/errors.hpp"
#include "scf/leakage.hpp"
#include "scf/trace_store.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace scf::cpa {

using Corr256 = Eigen::Matrix<double, 256, Eigen::Dynamic>;

/// Power model applied to hypothetical intermediates. The distance flavour
/// measures against a fixed reference byte; reference 0 reduces it to
/// plain Hamming weight.
struct ModelSpec {
    leakage::Model model = leakage::Model::HammingWeight;
    std::uint8_t hd_reference = 0;
};

/// Predicted first-round SubBytes output for a guess: sbox(pt ^ guess).
inline std::uint8_t hypothetical_intermediate(std::uint8_t pt_byte,
                                              std::uint8_t guess) noexcept {
    return aes::attack_point_value(pt_byte, guess);
}

inline double hypothetical_power(std::uint8_t intermediate,
                                 const ModelSpec &spec = {}) noexcept {
    return spec.model == leakage::Model::HammingDistance
               ? leakage::hamming_distance(intermediate, spec.hd_reference)
               : leakage::hamming_weight(intermediate);
}

/// H(g, v): hypothetical power of guess g when the plaintext byte is v.
/// The whole engine is a function of this table and per-value sample sums.
Eigen::MatrixXd model_table(const ModelSpec &spec);

/// Dense hypothesis matrix, entry (g, t) = hypothetical power of guess g
/// for trace t. The materialized form used by batch oracles and tests; the
/// streaming path never builds it.
Eigen::MatrixXd hypothetical_matrix(const std::vector<std::uint8_t> &pt_bytes,
                                    const ModelSpec &spec = {});

struct PearsonResult {
    double r = 0.0;
    bool degenerate = false;
};

/// Sample Pearson coefficient of two equally sized vectors (length >= 2).
/// Zero variance on either side yields {0, degenerate} instead of an error
/// so constant trace regions cannot abort a campaign.
template <typename DerivedX, typename DerivedY>
PearsonResult pearson(const Eigen::DenseBase<DerivedX> &x,
                      const Eigen::DenseBase<DerivedY> &y) {
    if (x.size() != y.size())
        throw ConfigError("pearson: length mismatch (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
    if (x.size() < 2)
        throw InsufficientData("pearson: need at least 2 points");
    const Eigen::ArrayXd xa =
        x.derived().reshaped().template cast<double>().array();
    const Eigen::ArrayXd ya =
        y.derived().reshaped().template cast<double>().array();
    const Eigen::ArrayXd cx = xa - xa.mean();
    const Eigen::ArrayXd cy = ya - ya.mean();
    const double sxx = (cx * cx).sum();
    const double syy = (cy * cy).sum();
    if (sxx <= 0.0 || syy <= 0.0)
        return {0.0, true};
    const double r = (cx * cy).sum() / std::sqrt(sxx * syy);
    return {std::clamp(r, -1.0, 1.0), false};
}

/// Mergeable sufficient statistics for the Pearson correlation of every
/// (guess, sample) pair at one key-byte position. Stored factored by
/// plaintext byte value: per-value trace counts and per-value sample sums,
/// plus global squared-sample sums. Every running sum of the classic
/// formulation derives from these exactly (see sums()), merging is
/// elementwise addition, and finalization is one 256x256 by 256xS product
/// instead of a rank-1 update per trace.
class CpaAccumulator {
  public:
    explicit CpaAccumulator(int n_samples);

    int n_samples() const noexcept {
        return static_cast<int>(ysum_.cols());
    }
    std::uint64_t n_traces() const noexcept { return n_; }

    /// Folds one trace in: counts pt_byte and adds the samples into its
    /// value bin. Geometry mismatches throw ConfigError.
    void add(std::uint8_t pt_byte, const float *samples, int n_samples);

    /// Union with an accumulator over a disjoint trace partition. Exact:
    /// counts and sums add elementwise.
    void merge(const CpaAccumulator &other);

    struct Sums {
        double n, sx, sy, sxx, syy, sxy;
    };
    /// The classic per-(guess, sample) running sums, derived from the
    /// factored representation under `spec`.
    Sums sums(int guess, int sample, const ModelSpec &spec = {}) const;

    const Eigen::Matrix<double, 256, Eigen::Dynamic> &value_sums() const
        noexcept {
        return ysum_;
    }
    const Eigen::VectorXd &square_sums() const noexcept { return yy_; }
    const std::array<std::uint64_t, 256> &value_counts() const noexcept {
        return count_;
    }

  private:
    Eigen::Matrix<double, 256, Eigen::Dynamic> ysum_; // value x sample
    Eigen::VectorXd yy_;
    std::array<std::uint64_t, 256> count_;
    std::uint64_t n_ = 0;
};

/// Folds `record` into `acc` for key-byte position `byte_pos`.
void accumulate(CpaAccumulator &acc, const store::TraceRecord &record,
                int byte_pos);

struct CorrelationResult {
    Corr256 r; // 256 guesses x n_samples
    std::vector<std::uint8_t> degenerate_sample; // zero measured variance
    std::array<std::uint8_t, 256> degenerate_guess; // zero hypothesis variance
    bool all_degenerate = false;
};

/// Pearson correlation of every guess against every sample. Fewer than 2
/// accumulated traces yields an all-degenerate zero matrix rather than an
/// error; key recovery enforces its own minimum.
CorrelationResult correlate_all(const CpaAccumulator &acc,
                                const ModelSpec &spec = {});

struct GuessScore {
    std::uint8_t guess;
    double peak_r;
    int peak_sample;
};

/// Guesses sorted by max |r| over the matrix columns, descending; ties
/// break toward the lower guess value, peak samples toward the lower index.
std::array<GuessScore, 256>
rank_guesses(const Eigen::Ref<const Eigen::MatrixXd> &corr);

struct AttackConfig {
    ModelSpec model{};
    int window_lo = 0;
    int window_hi = -1; // exclusive; -1 means n_samples
    int jobs = 1;
    std::optional<aes::Key128> truth;
};

struct ByteRecovery {
    std::array<GuessScore, 256> ranking;
};

struct KeyRecoveryReport {
    std::string input;
    std::uint64_t n_traces = 0;
    int n_samples = 0;
    int window_lo = 0;
    int window_hi = 0;
    ModelSpec model{};
    int jobs = 1;
    std::vector<int> degenerate_samples;
    std::array<ByteRecovery, 16> bytes;
    aes::Key128 recovered_key{};
    std::optional<aes::Key128> truth;
    std::array<int, 16> true_ranks{};
};

/// Streams the trace set through per-byte accumulators (partitioned over
/// `jobs` workers, merged in worker order), correlates, and assembles the
/// rank-0 guess of every byte position. Throws InsufficientData for fewer
/// than 2 traces; store errors propagate.
KeyRecoveryReport recover_key(const std::string &traceset_path,
                              const AttackConfig &config);

/// Report as a JSON document: per-byte ranking arrays, the recovered key
/// as 32-char lowercase hex, and the error map against the true key when
/// one was supplied.
std::string to_json(const KeyRecoveryReport &report);

} // namespace scf::cpa
