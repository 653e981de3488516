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
#include "scf/cpa.hpp"

#include "scf/metrics.hpp"

#include <json.hpp>

#include <exception>
#include <thread>

namespace scf::cpa {

Eigen::MatrixXd model_table(const ModelSpec &spec) {
    Eigen::MatrixXd h(256, 256);
    for (int v = 0; v < 256; ++v)
        for (int g = 0; g < 256; ++g)
            h(g, v) = hypothetical_power(
                hypothetical_intermediate(static_cast<std::uint8_t>(v),
                                          static_cast<std::uint8_t>(g)),
                spec);
    return h;
}

Eigen::MatrixXd hypothetical_matrix(const std::vector<std::uint8_t> &pt_bytes,
                                    const ModelSpec &spec) {
    Eigen::MatrixXd h(256, static_cast<Eigen::Index>(pt_bytes.size()));
    for (Eigen::Index t = 0; t < h.cols(); ++t)
        for (int g = 0; g < 256; ++g)
            h(g, t) = hypothetical_power(
                hypothetical_intermediate(
                    pt_bytes[static_cast<std::size_t>(t)],
                    static_cast<std::uint8_t>(g)),
                spec);
    return h;
}

CpaAccumulator::CpaAccumulator(int n_samples) {
    if (n_samples < 1)
        throw ConfigError("accumulator needs at least 1 sample");
    ysum_.setZero(256, n_samples);
    yy_.setZero(n_samples);
    count_.fill(0);
}

void CpaAccumulator::add(std::uint8_t pt_byte, const float *samples,
                         int n_samples) {
    if (n_samples != this->n_samples())
        throw ConfigError("trace geometry mismatch: accumulator has " +
                          std::to_string(this->n_samples()) +
                          " samples, trace has " + std::to_string(n_samples));
    const Eigen::Map<const Eigen::VectorXf> y(samples, n_samples);
    const Eigen::VectorXd yd = y.cast<double>();
    ysum_.row(pt_byte) += yd.transpose();
    yy_ += yd.cwiseProduct(yd);
    ++count_[pt_byte];
    ++n_;
}

void CpaAccumulator::merge(const CpaAccumulator &other) {
    if (other.n_samples() != n_samples())
        throw ConfigError("cannot merge accumulators of different widths");
    ysum_ += other.ysum_;
    yy_ += other.yy_;
    for (int v = 0; v < 256; ++v)
        count_[static_cast<std::size_t>(v)] +=
            other.count_[static_cast<std::size_t>(v)];
    n_ += other.n_;
}

CpaAccumulator::Sums CpaAccumulator::sums(int guess, int sample,
                                          const ModelSpec &spec) const {
    if (guess < 0 || guess > 255 || sample < 0 || sample >= n_samples())
        throw ConfigError("sums index out of range");
    Sums s{};
    s.n = static_cast<double>(n_);
    s.sy = ysum_.col(sample).sum();
    s.syy = yy_(sample);
    for (int v = 0; v < 256; ++v) {
        const double cnt =
            static_cast<double>(count_[static_cast<std::size_t>(v)]);
        if (cnt == 0.0 && ysum_(v, sample) == 0.0)
            continue;
        const double h = hypothetical_power(
            hypothetical_intermediate(static_cast<std::uint8_t>(v),
                                      static_cast<std::uint8_t>(guess)),
            spec);
        s.sx += h * cnt;
        s.sxx += h * h * cnt;
        s.sxy += h * ysum_(v, sample);
    }
    return s;
}

void accumulate(CpaAccumulator &acc, const store::TraceRecord &record,
                int byte_pos) {
    if (byte_pos < 0 || byte_pos > 15)
        throw ConfigError("byte position out of range: " +
                          std::to_string(byte_pos));
    acc.add(record.plaintext[static_cast<std::size_t>(byte_pos)],
            record.samples.data(), static_cast<int>(record.samples.size()));
}

CorrelationResult correlate_all(const CpaAccumulator &acc,
                                const ModelSpec &spec) {
    const int S = acc.n_samples();
    CorrelationResult out;
    out.r.setZero(256, S);
    out.degenerate_sample.assign(static_cast<std::size_t>(S), 0);
    out.degenerate_guess.fill(0);

    const double n = static_cast<double>(acc.n_traces());
    if (acc.n_traces() < 2) {
        out.degenerate_sample.assign(static_cast<std::size_t>(S), 1);
        out.degenerate_guess.fill(1);
        out.all_degenerate = true;
        return out;
    }

    const Eigen::MatrixXd h = model_table(spec);
    Eigen::VectorXd cnt(256);
    for (int v = 0; v < 256; ++v)
        cnt(v) =
            static_cast<double>(acc.value_counts()[static_cast<std::size_t>(
                v)]);

    const Eigen::VectorXd sx = h * cnt;
    const Eigen::VectorXd sxx = h.cwiseProduct(h) * cnt;
    const Eigen::RowVectorXd sy = acc.value_sums().colwise().sum();
    const Eigen::VectorXd &syy = acc.square_sums();
    Eigen::Matrix<double, 256, Eigen::Dynamic> num = h * acc.value_sums();
    num *= n;
    num.noalias() -= sx * sy;

    const Eigen::ArrayXd dx = (n * sxx - sx.cwiseProduct(sx)).array();
    const Eigen::ArrayXd dy =
        (n * syy).array() - sy.transpose().array().square();
    const Eigen::ArrayXd sdx = dx.max(0.0).sqrt();

    bool any_guess = false;
    for (int g = 0; g < 256; ++g)
        if (dx(g) <= 0.0) {
            out.degenerate_guess[static_cast<std::size_t>(g)] = 1;
            any_guess = true;
        }

    bool any_sample_ok = false;
    for (int s = 0; s < S; ++s) {
        if (dy(s) <= 0.0) {
            out.degenerate_sample[static_cast<std::size_t>(s)] = 1;
            out.r.col(s).setZero();
            continue;
        }
        any_sample_ok = true;
        out.r.col(s) = (num.col(s).array() / (sdx * std::sqrt(dy(s))))
                           .matrix();
    }
    if (any_guess)
        for (int g = 0; g < 256; ++g)
            if (out.degenerate_guess[static_cast<std::size_t>(g)])
                out.r.row(g).setZero();
    out.r = out.r.cwiseMax(-1.0).cwiseMin(1.0);
    out.all_degenerate =
        !any_sample_ok ||
        std::all_of(out.degenerate_guess.begin(), out.degenerate_guess.end(),
                    [](std::uint8_t d) { return d != 0; });
    return out;
}

std::array<GuessScore, 256>
rank_guesses(const Eigen::Ref<const Eigen::MatrixXd> &corr) {
    if (corr.rows() != 256)
        throw ConfigError("correlation matrix must have 256 guess rows");
    if (corr.cols() < 1)
        throw ConfigError("correlation matrix must have at least 1 sample");
    std::array<GuessScore, 256> ranked;
    for (int g = 0; g < 256; ++g) {
        double best = -1.0;
        double best_r = 0.0;
        int best_s = 0;
        for (int s = 0; s < corr.cols(); ++s) {
            const double a = std::abs(corr(g, s));
            if (a > best) {
                best = a;
                best_r = corr(g, s);
                best_s = s;
            }
        }
        ranked[static_cast<std::size_t>(g)] =
            GuessScore{static_cast<std::uint8_t>(g), best_r, best_s};
    }
    std::sort(ranked.begin(), ranked.end(),
              [](const GuessScore &a, const GuessScore &b) {
                  const double aa = std::abs(a.peak_r);
                  const double ab = std::abs(b.peak_r);
                  if (aa != ab)
                      return aa > ab;
                  return a.guess < b.guess;
              });
    return ranked;
}

namespace {

struct ByteAccumulators {
    std::vector<CpaAccumulator> accs; // one per key-byte position

    explicit ByteAccumulators(int n_samples) {
        accs.reserve(16);
        for (int b = 0; b < 16; ++b)
            accs.emplace_back(n_samples);
    }

    void add(const store::TraceRecord &rec) {
        for (int b = 0; b < 16; ++b)
            accumulate(accs[static_cast<std::size_t>(b)], rec, b);
    }
};

void accumulate_range(const std::string &path, std::uint64_t begin,
                      std::uint64_t end, ByteAccumulators &out) {
    store::TraceSetReader reader(path);
    reader.seek(begin);
    store::TraceRecord rec;
    for (std::uint64_t t = begin; t < end; ++t) {
        if (!reader.next(rec))
            throw FormatError(FormatError::Kind::Truncated,
                              "reader ended before record " +
                                  std::to_string(t) + ": " + path);
        out.add(rec);
    }
}

} // namespace

KeyRecoveryReport recover_key(const std::string &traceset_path,
                              const AttackConfig &config) {
    store::TraceSetReader probe(traceset_path);
    const std::uint64_t n = probe.header().n_traces;
    const int S = static_cast<int>(probe.header().n_samples);
    if (n < 2)
        throw InsufficientData("key recovery needs at least 2 traces, got " +
                               std::to_string(n) + ": " + traceset_path);

    KeyRecoveryReport report;
    report.input = traceset_path;
    report.n_traces = n;
    report.n_samples = S;
    report.model = config.model;
    report.window_lo = config.window_lo;
    report.window_hi = config.window_hi < 0 ? S : config.window_hi;
    if (report.window_lo < 0 || report.window_hi > S ||
        report.window_lo >= report.window_hi)
        throw ConfigError("window [" + std::to_string(report.window_lo) +
                          ", " + std::to_string(report.window_hi) +
                          ") does not fit " + std::to_string(S) + " samples");

    int jobs = config.jobs;
    if (jobs < 1)
        throw ConfigError("jobs must be >= 1");
    if (static_cast<std::uint64_t>(jobs) > n)
        jobs = static_cast<int>(n);
    report.jobs = config.jobs;

    // Partition the trace range, accumulate per worker, merge in worker
    // order. Sums are exact, so any partitioning yields identical results.
    std::vector<ByteAccumulators> parts;
    parts.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w)
        parts.emplace_back(S);
    const std::uint64_t chunk =
        (n + static_cast<std::uint64_t>(jobs) - 1) /
        static_cast<std::uint64_t>(jobs);
    if (jobs == 1) {
        accumulate_range(traceset_path, 0, n, parts[0]);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(
            static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            const std::uint64_t begin =
                std::min(n, static_cast<std::uint64_t>(w) * chunk);
            const std::uint64_t end = std::min(n, begin + chunk);
            workers.emplace_back([&, w, begin, end] {
                try {
                    accumulate_range(traceset_path, begin, end,
                                     parts[static_cast<std::size_t>(w)]);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] =
                        std::current_exception();
                }
            });
        }
        for (auto &t : workers)
            t.join();
        for (const auto &e : errors)
            if (e)
                std::rethrow_exception(e);
        for (int w = 1; w < jobs; ++w)
            for (int b = 0; b < 16; ++b)
                parts[0].accs[static_cast<std::size_t>(b)].merge(
                    parts[static_cast<std::size_t>(w)]
                        .accs[static_cast<std::size_t>(b)]);
    }

    const int wlo = report.window_lo;
    const int wlen = report.window_hi - report.window_lo;
    std::vector<std::uint8_t> degenerate(static_cast<std::size_t>(S), 1);
    for (int b = 0; b < 16; ++b) {
        const CorrelationResult corr =
            correlate_all(parts[0].accs[static_cast<std::size_t>(b)],
                          config.model);
        for (int s = 0; s < S; ++s)
            degenerate[static_cast<std::size_t>(s)] &=
                corr.degenerate_sample[static_cast<std::size_t>(s)];
        auto ranking = rank_guesses(corr.r.middleCols(wlo, wlen));
        for (auto &score : ranking)
            score.peak_sample += wlo;
        report.bytes[static_cast<std::size_t>(b)].ranking = ranking;
        report.recovered_key[static_cast<std::size_t>(b)] = ranking[0].guess;
    }
    for (int s = 0; s < S; ++s)
        if (degenerate[static_cast<std::size_t>(s)])
            report.degenerate_samples.push_back(s);

    if (config.truth) {
        report.truth = config.truth;
        for (int b = 0; b < 16; ++b) {
            const auto &ranking =
                report.bytes[static_cast<std::size_t>(b)].ranking;
            const std::uint8_t truth_byte =
                (*config.truth)[static_cast<std::size_t>(b)];
            for (int i = 0; i < 256; ++i)
                if (ranking[static_cast<std::size_t>(i)].guess ==
                    truth_byte) {
                    report.true_ranks[static_cast<std::size_t>(b)] = i;
                    break;
                }
        }
    }
    return report;
}

std::string to_json(const KeyRecoveryReport &report) {
    nlohmann::json j;
    j["input"] = report.input;
    j["n_traces"] = report.n_traces;
    j["n_samples"] = report.n_samples;
    j["window"] = {report.window_lo, report.window_hi};
    j["model"] = report.model.model == leakage::Model::HammingDistance
                     ? "hamming_distance"
                     : "hamming_weight";
    j["hd_reference"] = report.model.hd_reference;
    j["jobs"] = report.jobs;
    j["degenerate_samples"] = report.degenerate_samples;
    j["recovered_key"] = aes::to_hex(report.recovered_key);
    nlohmann::json bytes = nlohmann::json::array();
    for (int b = 0; b < 16; ++b) {
        nlohmann::json ranking = nlohmann::json::array();
        const auto &scores = report.bytes[static_cast<std::size_t>(b)].ranking;
        for (int i = 0; i < 256; ++i) {
            const GuessScore &s = scores[static_cast<std::size_t>(i)];
            ranking.push_back({{"rank", i},
                               {"guess", s.guess},
                               {"peak_r", s.peak_r},
                               {"peak_sample", s.peak_sample}});
        }
        bytes.push_back({{"position", b}, {"ranking", std::move(ranking)}});
    }
    j["bytes"] = std::move(bytes);
    if (report.truth) {
        const metrics::KeyErrorMap diff =
            metrics::key_error_map(report.recovered_key, *report.truth);
        nlohmann::json nibbles = nlohmann::json::array();
        for (const auto &nd : diff.nibble_diffs)
            nibbles.push_back(
                {{"byte", nd.byte}, {"nibble", nd.high ? "high" : "low"}});
        j["truth"] = {{"key", aes::to_hex(*report.truth)},
                      {"ranks", report.true_ranks},
                      {"byte_diffs", diff.byte_diffs},
                      {"nibble_diffs", std::move(nibbles)},
                      {"rendered_diff", diff.render(false)}};
    }
    return j.dump(2) + "\n";
}

} // namespace scf::cpa
