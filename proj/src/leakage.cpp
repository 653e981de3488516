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
#include "scf/leakage.hpp"

#include "scf/errors.hpp"
#include "scf/rng.hpp"
#include "scf/trace_store.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace scf::leakage {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string &s, const char *what) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(FormatError::Kind::Inconsistent,
                          std::string("malformed ") + what + ": " + s);
    return v;
}

std::uint64_t parse_u64(const std::string &s, const char *what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw FormatError(FormatError::Kind::Inconsistent,
                          std::string("malformed ") + what + ": " + s);
    return v;
}

const std::string &require(const std::map<std::string, std::string> &meta,
                           const std::string &key) {
    const auto it = meta.find(key);
    if (it == meta.end())
        throw FormatError(FormatError::Kind::Inconsistent,
                          "metadata lacks required key: " + key);
    return it->second;
}

int per_byte_weight(Model model, std::uint8_t ref, std::uint8_t b) noexcept {
    return model == Model::HammingDistance ? hamming_distance(b, ref)
                                           : hamming_weight(b);
}

} // namespace

const std::vector<Variant> &VariantBank::variants(Op op) const {
    const auto idx = static_cast<std::size_t>(op);
    if (idx >= per_op.size())
        throw ConfigError("unknown op label " + std::to_string(idx));
    return per_op[idx];
}

double baseline_level(Op op) noexcept {
    switch (op) {
    case Op::AddRoundKey:
        return 10.0;
    case Op::SubBytes:
        return 0.0;
    case Op::ShiftRows:
        return 20.0;
    case Op::MixColumns:
        return 30.0;
    }
    return 0.0;
}

VariantBank baseline_bank() {
    VariantBank bank;
    for (int op = 0; op < 4; ++op) {
        const double level = baseline_level(static_cast<Op>(op));
        bank.per_op[static_cast<std::size_t>(op)] = {
            Variant{1.0, level, level, level + 8.0}};
    }
    return bank;
}

VariantBank swapper_bank(const std::vector<double> &ladder,
                         int variants_per_op, double data_gain,
                         bool span_fit) {
    if (variants_per_op < 2)
        throw ConfigError("swap defense needs at least 2 variants per op");
    if (ladder.size() != static_cast<std::size_t>(variants_per_op) + 2)
        throw ConfigError("ladder needs " +
                          std::to_string(variants_per_op + 2) +
                          " rungs for " + std::to_string(variants_per_op) +
                          " variants, got " + std::to_string(ladder.size()));
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i - 1] < ladder[i]))
            throw ConfigError("ladder rungs must be strictly increasing");

    VariantBank bank;
    bank.ladder = ladder;
    std::vector<Variant> variants;
    for (int j = 0; j < variants_per_op; ++j) {
        const double lo = ladder[static_cast<std::size_t>(j)];
        const double hi = ladder[static_cast<std::size_t>(j) + 2];
        Variant v{};
        v.range_lo = lo;
        v.range_hi = hi;
        if (span_fit) {
            v.gain = (hi - lo) / 8.0;
            v.offset = lo;
        } else {
            if (!(data_gain > 0.0))
                throw ConfigError("data gain must be positive");
            if (data_gain * 8.0 > hi - lo)
                throw ConfigError(
                    "data gain " + fmt_double(data_gain) +
                    " does not fit range [" + fmt_double(lo) + ", " +
                    fmt_double(hi) + "]; maximum is " +
                    fmt_double((hi - lo) / 8.0));
            v.gain = data_gain;
            v.offset = (lo + hi) / 2.0 - 4.0 * data_gain;
        }
        variants.push_back(v);
    }
    for (auto &per : bank.per_op)
        per = variants;
    return bank;
}

void validate_bank(const VariantBank &bank, Defense defense) {
    for (int op = 0; op < 4; ++op) {
        const auto &vs = bank.per_op[static_cast<std::size_t>(op)];
        const std::string label = aes::op_name(static_cast<Op>(op));
        if (vs.empty())
            throw ConfigError("no variants for " + label);
        if (defense == Defense::Swapper && vs.size() < 2)
            throw ConfigError("swap defense needs at least 2 variants for " +
                              label);
        for (std::size_t j = 0; j < vs.size(); ++j) {
            const Variant &v = vs[j];
            if (!(v.gain > 0.0))
                throw ConfigError("variant gain must be positive for " +
                                  label);
            if (v.offset < v.range_lo ||
                v.offset + 8.0 * v.gain > v.range_hi)
                throw ConfigError("variant " + std::to_string(j) + " of " +
                                  label + " leaks outside its range");
            if (j > 0 && !(vs[j].range_lo < vs[j - 1].range_hi))
                throw ConfigError("consecutive variant ranges of " + label +
                                  " do not overlap");
        }
    }
}

int select_variant(const VariantBank &bank, PufSelector &selector, Op op) {
    const auto &vs = bank.variants(op); // validates the label
    const std::uint64_t word = rng::at(selector.seed, selector.counter);
    ++selector.counter;
    return static_cast<int>(
        rng::bounded(word, static_cast<std::uint32_t>(vs.size())));
}

std::vector<OpSlot> build_op_schedule(const LeakageConfig &config) {
    if (config.samples_per_op < 1)
        throw ConfigError("samples_per_op must be >= 1");
    std::vector<OpSlot> slots;
    slots.reserve(aes::kOpCount);
    int offset = 0;
    int index = 0;
    auto push = [&](int round, Op op) {
        const bool attack = index == aes::kAttackOpIndex;
        const int n = attack ? 16 : config.samples_per_op;
        slots.push_back(OpSlot{index, round, op, offset, n, attack});
        offset += n;
        ++index;
    };
    push(0, Op::AddRoundKey);
    for (int r = 1; r <= 9; ++r) {
        push(r, Op::SubBytes);
        push(r, Op::ShiftRows);
        push(r, Op::MixColumns);
        push(r, Op::AddRoundKey);
    }
    push(10, Op::SubBytes);
    push(10, Op::ShiftRows);
    push(10, Op::AddRoundKey);
    if (offset > config.trace_length)
        throw ConfigError("op layout needs " + std::to_string(offset) +
                          " samples but trace_length is " +
                          std::to_string(config.trace_length));
    return slots;
}

void validate_config(const LeakageConfig &config) {
    if (!std::isfinite(config.noise_sigma) || config.noise_sigma < 0.0)
        throw ConfigError("noise_sigma must be finite and >= 0");
    if (config.trace_length < 1)
        throw ConfigError("trace_length must be >= 1");
    build_op_schedule(config); // layout fit
    if (config.defense == Defense::Swapper)
        validate_bank(swapper_bank(config.ladder, config.variants_per_op,
                                   config.data_gain, config.span_fit),
                      Defense::Swapper);
}

std::uint64_t selector_draws_per_trace(const LeakageConfig &config) {
    return config.reselect == Reselect::PerTrace
               ? 4
               : static_cast<std::uint64_t>(aes::kOpCount);
}

Trace synthesize_trace(const Block128 &pt, const Key128 &key,
                       const LeakageConfig &config, const VariantBank *bank,
                       PufSelector &selector, std::uint64_t noise_seed,
                       std::uint64_t trace_index) {
    const bool swapping = config.defense == Defense::Swapper;
    if (swapping && bank == nullptr)
        throw ConfigError("swap defense requires a variant bank");
    static const VariantBank baseline = baseline_bank();
    const VariantBank &b = bank ? *bank : baseline;

    aes::IntermediateTrace record;
    Trace trace;
    trace.plaintext = pt;
    trace.ciphertext = aes::encrypt_block(pt, key, record);

    const std::vector<OpSlot> schedule = build_op_schedule(config);
    std::vector<double> clean(static_cast<std::size_t>(config.trace_length),
                              0.0);

    // Resolve the variant of each slot. Per-trace reselection draws once
    // per op label (label order), per-op once per slot (slot order).
    std::array<int, aes::kOpCount> chosen{};
    if (!swapping) {
        chosen.fill(0);
    } else if (config.reselect == Reselect::PerTrace) {
        std::array<int, 4> per_label{};
        for (int op = 0; op < 4; ++op)
            per_label[static_cast<std::size_t>(op)] =
                select_variant(b, selector, static_cast<Op>(op));
        for (const OpSlot &slot : schedule)
            chosen[static_cast<std::size_t>(slot.index)] =
                per_label[static_cast<std::size_t>(slot.op)];
    } else {
        for (const OpSlot &slot : schedule)
            chosen[static_cast<std::size_t>(slot.index)] =
                select_variant(b, selector, slot.op);
    }

    for (const OpSlot &slot : schedule) {
        const Block128 &state =
            record.records[static_cast<std::size_t>(slot.index)].state;
        const Variant &v = b.variants(
            slot.op)[static_cast<std::size_t>(
            chosen[static_cast<std::size_t>(slot.index)])];
        if (slot.decomposed) {
            for (int i = 0; i < 16; ++i)
                clean[static_cast<std::size_t>(slot.sample_offset + i)] =
                    variant_power(
                        v, per_byte_weight(config.model, config.hd_reference,
                                           state[static_cast<std::size_t>(
                                               i)]));
        } else {
            int sum = 0;
            for (const std::uint8_t byte : state)
                sum += per_byte_weight(config.model, config.hd_reference,
                                       byte);
            const double value = variant_power(v, sum / 16.0);
            for (int s = 0; s < slot.n_samples; ++s)
                clean[static_cast<std::size_t>(slot.sample_offset + s)] =
                    value;
        }
    }

    trace.samples.resize(static_cast<std::size_t>(config.trace_length));
    const std::uint64_t base =
        trace_index * static_cast<std::uint64_t>(config.trace_length);
    for (int s = 0; s < config.trace_length; ++s) {
        double value = clean[static_cast<std::size_t>(s)];
        if (config.noise_sigma > 0.0)
            value += config.noise_sigma *
                     rng::normal(noise_seed,
                                 base + static_cast<std::uint64_t>(s));
        trace.samples[static_cast<std::size_t>(s)] =
            static_cast<float>(quantize_sample(value));
    }

    if (config.log_variants) {
        trace.variant_log.resize(aes::kOpCount);
        for (int i = 0; i < aes::kOpCount; ++i)
            trace.variant_log[static_cast<std::size_t>(i)] =
                static_cast<std::uint8_t>(
                    chosen[static_cast<std::size_t>(i)]);
    }
    return trace;
}

Block128 plaintext_for(const PtSource &source, const LeakageConfig &config,
                       std::uint64_t t) {
    switch (source.kind) {
    case PtSource::Kind::Random:
        return rng::bytes16(rng::derive(config.seed, rng::kTagPlaintext), t);
    case PtSource::Kind::Enumerate: {
        if (source.enumerate_byte < 0) {
            Block128 pt{};
            for (int b = 0; b < 16; ++b)
                pt[static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(
                    (t + static_cast<std::uint64_t>(b)) & 0xff);
            return pt;
        }
        if (source.enumerate_byte > 15)
            throw ConfigError("enumerate position out of range: " +
                              std::to_string(source.enumerate_byte));
        Block128 pt =
            rng::bytes16(rng::derive(config.seed, rng::kTagPlaintext), t);
        pt[static_cast<std::size_t>(source.enumerate_byte)] =
            static_cast<std::uint8_t>(t & 0xff);
        return pt;
    }
    case PtSource::Kind::File: {
        // Callers stream files through generate_campaign; the random-access
        // form reopens per call and is only for small inputs.
        std::ifstream in(source.file, std::ios::binary);
        if (!in)
            throw IoError("cannot open plaintext file: " + source.file);
        in.seekg(static_cast<std::streamoff>(t * 16));
        Block128 pt{};
        if (!in.read(reinterpret_cast<char *>(pt.data()), 16))
            throw IoError("plaintext file ends before record " +
                          std::to_string(t) + ": " + source.file);
        return pt;
    }
    }
    throw ConfigError("unknown plaintext source");
}

std::map<std::string, std::string>
metadata_from_config(const LeakageConfig &config, const PtSource &source) {
    std::map<std::string, std::string> meta;
    meta["model"] = config.model == Model::HammingDistance
                        ? "hamming_distance"
                        : "hamming_weight";
    meta["hd_reference"] = std::to_string(config.hd_reference);
    meta["noise_sigma"] = fmt_double(config.noise_sigma);
    meta["samples_per_op"] = std::to_string(config.samples_per_op);
    meta["trace_length"] = std::to_string(config.trace_length);
    meta["n_ops"] = std::to_string(aes::kOpCount);
    meta["attack_slot"] = std::to_string(aes::kAttackOpIndex);
    meta["defense"] =
        config.defense == Defense::Swapper ? "swapper" : "none";
    meta["reselect"] = config.reselect == Reselect::PerOp ? "per_op"
                                                          : "per_trace";
    meta["seed"] = std::to_string(config.seed);
    meta["variants_per_op"] = std::to_string(config.variants_per_op);
    std::string ladder;
    for (std::size_t i = 0; i < config.ladder.size(); ++i) {
        if (i)
            ladder += ',';
        ladder += fmt_double(config.ladder[i]);
    }
    meta["ladder"] = ladder;
    meta["data_gain"] = fmt_double(config.data_gain);
    meta["fit"] = config.span_fit ? "span" : "center";
    switch (source.kind) {
    case PtSource::Kind::Random:
        meta["pt_source"] = "random";
        break;
    case PtSource::Kind::Enumerate:
        meta["pt_source"] =
            source.enumerate_byte < 0
                ? "enumerate:all"
                : "enumerate:" + std::to_string(source.enumerate_byte);
        break;
    case PtSource::Kind::File:
        meta["pt_source"] = "file";
        break;
    }
    return meta;
}

LeakageConfig
config_from_metadata(const std::map<std::string, std::string> &meta) {
    LeakageConfig config;
    const std::string &model = require(meta, "model");
    if (model == "hamming_weight")
        config.model = Model::HammingWeight;
    else if (model == "hamming_distance")
        config.model = Model::HammingDistance;
    else
        throw FormatError(FormatError::Kind::Inconsistent,
                          "unknown model: " + model);
    config.hd_reference = static_cast<std::uint8_t>(
        parse_u64(require(meta, "hd_reference"), "hd_reference"));
    config.noise_sigma =
        parse_double(require(meta, "noise_sigma"), "noise_sigma");
    config.samples_per_op = static_cast<int>(
        parse_u64(require(meta, "samples_per_op"), "samples_per_op"));
    config.trace_length = static_cast<int>(
        parse_u64(require(meta, "trace_length"), "trace_length"));
    if (parse_u64(require(meta, "n_ops"), "n_ops") != aes::kOpCount)
        throw FormatError(FormatError::Kind::Inconsistent,
                          "unexpected n_ops: " + require(meta, "n_ops"));
    const std::string &defense = require(meta, "defense");
    if (defense == "none")
        config.defense = Defense::None;
    else if (defense == "swapper")
        config.defense = Defense::Swapper;
    else
        throw FormatError(FormatError::Kind::Inconsistent,
                          "unknown defense: " + defense);
    const std::string &reselect = require(meta, "reselect");
    if (reselect == "per_trace")
        config.reselect = Reselect::PerTrace;
    else if (reselect == "per_op")
        config.reselect = Reselect::PerOp;
    else
        throw FormatError(FormatError::Kind::Inconsistent,
                          "unknown reselect: " + reselect);
    config.seed = parse_u64(require(meta, "seed"), "seed");
    config.variants_per_op = static_cast<int>(
        parse_u64(require(meta, "variants_per_op"), "variants_per_op"));
    config.ladder.clear();
    std::stringstream ss(require(meta, "ladder"));
    std::string rung;
    while (std::getline(ss, rung, ','))
        config.ladder.push_back(parse_double(rung, "ladder rung"));
    config.data_gain = parse_double(require(meta, "data_gain"), "data_gain");
    config.span_fit = require(meta, "fit") == "span";
    return config;
}

void generate_campaign(const std::string &path, std::uint64_t n,
                       const Key128 &key, const LeakageConfig &config,
                       const PtSource &source) {
    validate_config(config);
    store::TraceSetHeader header;
    header.n_traces = n;
    header.n_samples = static_cast<std::uint32_t>(config.trace_length);
    header.flags = config.log_variants ? store::kFlagVariantLog : 0;
    header.metadata = metadata_from_config(config, source);

    const VariantBank bank =
        config.defense == Defense::Swapper
            ? swapper_bank(config.ladder, config.variants_per_op,
                           config.data_gain, config.span_fit)
            : baseline_bank();
    const std::uint64_t noise_seed = rng::derive(config.seed, rng::kTagNoise);
    const std::uint64_t puf_seed = rng::derive(config.seed, rng::kTagPuf);
    const std::uint64_t draws = selector_draws_per_trace(config);

    std::ifstream pt_file;
    if (source.kind == PtSource::Kind::File) {
        pt_file.open(source.file, std::ios::binary);
        if (!pt_file)
            throw IoError("cannot open plaintext file: " + source.file);
    }

    store::TraceSetWriter writer(path, header);
    store::TraceRecord rec;
    for (std::uint64_t t = 0; t < n; ++t) {
        Block128 pt;
        if (source.kind == PtSource::Kind::File) {
            if (!pt_file.read(reinterpret_cast<char *>(pt.data()), 16))
                throw IoError("plaintext file ends before record " +
                              std::to_string(t) + ": " + source.file);
        } else {
            pt = plaintext_for(source, config, t);
        }
        PufSelector selector{puf_seed, t * draws};
        Trace trace = synthesize_trace(pt, key, config, &bank, selector,
                                       noise_seed, t);
        rec.plaintext = trace.plaintext;
        rec.ciphertext = trace.ciphertext;
        rec.samples = std::move(trace.samples);
        rec.variant_log = std::move(trace.variant_log);
        writer.write(rec);
    }
    writer.finish();
}

} // namespace scf::leakage
