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
#include "scf/trace_store.hpp"

#include "scf/errors.hpp"

#include <cstring>
#include <filesystem>

namespace scf::store {

namespace {

void put_u32(char *p, std::uint32_t v) noexcept {
    p[0] = static_cast<char>(v & 0xff);
    p[1] = static_cast<char>((v >> 8) & 0xff);
    p[2] = static_cast<char>((v >> 16) & 0xff);
    p[3] = static_cast<char>((v >> 24) & 0xff);
}

void put_u64(char *p, std::uint64_t v) noexcept {
    for (int i = 0; i < 8; ++i)
        p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

std::uint32_t get_u32(const char *p) noexcept {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i)
        v = (v << 8) | static_cast<std::uint8_t>(p[i]);
    return v;
}

std::uint64_t get_u64(const char *p) noexcept {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | static_cast<std::uint8_t>(p[i]);
    return v;
}

void put_f32(char *p, float v) noexcept {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(p, bits);
}

float get_f32(const char *p) noexcept {
    const std::uint32_t bits = get_u32(p);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

} // namespace

std::string serialize_metadata(const std::map<std::string, std::string> &meta) {
    std::string out;
    for (const auto &[k, v] : meta) {
        if (k.find_first_of("=\n") != std::string::npos ||
            v.find('\n') != std::string::npos)
            throw ConfigError("metadata key/value must not contain '=' in "
                              "keys or newlines: " +
                              k);
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::map<std::string, std::string> parse_metadata(const std::string &text) {
    std::map<std::string, std::string> meta;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos)
            throw FormatError(FormatError::Kind::Inconsistent,
                              "metadata not newline-terminated");
        const std::string line = text.substr(pos, eol - pos);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(FormatError::Kind::Inconsistent,
                              "metadata line without '=': " + line);
        meta.emplace(line.substr(0, eq), line.substr(eq + 1));
        pos = eol + 1;
    }
    return meta;
}

std::uint32_t TraceSetHeader::n_ops() const {
    if (!has_variant_log())
        return 0;
    const auto it = metadata.find("n_ops");
    if (it == metadata.end())
        throw FormatError(FormatError::Kind::Inconsistent,
                          "variant-log flag set but metadata lacks n_ops");
    return static_cast<std::uint32_t>(std::stoul(it->second));
}

std::uint64_t TraceSetHeader::record_size() const {
    return 32 + 4ull * n_samples + n_ops();
}

TraceSetWriter::TraceSetWriter(const std::string &path,
                               const TraceSetHeader &header)
    : path_(path), header_(header) {
    if (header_.sample_dtype != kDtypeF32)
        throw ConfigError("unsupported sample dtype " +
                          std::to_string(header_.sample_dtype));
    header_.n_ops(); // validates the n_ops key when the flag is set
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_)
        throw IoError("cannot open for writing: " + path);
    const std::string meta = serialize_metadata(header_.metadata);
    std::vector<char> head(kFixedHeaderSize + meta.size());
    std::memcpy(head.data(), kMagic, 8);
    put_u64(head.data() + 8, header_.n_traces);
    put_u32(head.data() + 16, header_.n_samples);
    head[20] = static_cast<char>(header_.sample_dtype);
    head[21] = static_cast<char>(header_.flags);
    put_u32(head.data() + 22, static_cast<std::uint32_t>(meta.size()));
    std::memcpy(head.data() + kFixedHeaderSize, meta.data(), meta.size());
    out_.write(head.data(), static_cast<std::streamsize>(head.size()));
    if (!out_)
        throw IoError("write failed: " + path);
    buf_.resize(header_.record_size());
}

TraceSetWriter::~TraceSetWriter() = default;

void TraceSetWriter::write(const TraceRecord &record) {
    if (finished_)
        throw ConfigError("write after finish: " + path_);
    if (written_ >= header_.n_traces)
        throw ConfigError("more records than the declared n_traces=" +
                          std::to_string(header_.n_traces) + ": " + path_);
    if (record.samples.size() != header_.n_samples)
        throw ConfigError("record sample count " +
                          std::to_string(record.samples.size()) +
                          " does not match header n_samples " +
                          std::to_string(header_.n_samples));
    const std::uint32_t ops = header_.n_ops();
    if (record.variant_log.size() != ops)
        throw ConfigError("record variant log length " +
                          std::to_string(record.variant_log.size()) +
                          " does not match header n_ops " +
                          std::to_string(ops));
    char *p = buf_.data();
    std::memcpy(p, record.plaintext.data(), 16);
    std::memcpy(p + 16, record.ciphertext.data(), 16);
    for (std::uint32_t s = 0; s < header_.n_samples; ++s)
        put_f32(p + 32 + 4 * s, record.samples[s]);
    if (ops)
        std::memcpy(p + 32 + 4ull * header_.n_samples,
                    record.variant_log.data(), ops);
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    if (!out_)
        throw IoError("write failed: " + path_);
    ++written_;
}

void TraceSetWriter::finish() {
    if (finished_)
        return;
    if (written_ != header_.n_traces)
        throw ConfigError("wrote " + std::to_string(written_) +
                          " records but header declares " +
                          std::to_string(header_.n_traces) + ": " + path_);
    out_.flush();
    if (!out_)
        throw IoError("flush failed: " + path_);
    out_.close();
    finished_ = true;
}

TraceSetReader::TraceSetReader(const std::string &path) : path_(path) {
    std::error_code ec;
    const auto file_size = std::filesystem::file_size(path, ec);
    if (ec)
        throw IoError("cannot stat: " + path + " (" + ec.message() + ")");
    in_.open(path, std::ios::binary);
    if (!in_)
        throw IoError("cannot open for reading: " + path);

    char fixed[kFixedHeaderSize];
    if (file_size < kFixedHeaderSize ||
        !in_.read(fixed, kFixedHeaderSize))
        throw FormatError(FormatError::Kind::Truncated,
                          "file shorter than the fixed header: " + path);
    if (std::memcmp(fixed, kMagic, 8) != 0)
        throw FormatError(FormatError::Kind::BadMagic,
                          "bad magic, not a trace container: " + path);
    header_.n_traces = get_u64(fixed + 8);
    header_.n_samples = get_u32(fixed + 16);
    header_.sample_dtype = static_cast<std::uint8_t>(fixed[20]);
    header_.flags = static_cast<std::uint8_t>(fixed[21]);
    const std::uint32_t meta_len = get_u32(fixed + 22);
    if (header_.sample_dtype != kDtypeF32)
        throw FormatError(FormatError::Kind::UnsupportedDtype,
                          "unsupported sample dtype " +
                              std::to_string(header_.sample_dtype) + ": " +
                              path);
    if (file_size < kFixedHeaderSize + meta_len)
        throw FormatError(FormatError::Kind::Truncated,
                          "file ends inside the metadata block: " + path);
    std::string meta(meta_len, '\0');
    if (meta_len && !in_.read(meta.data(), meta_len))
        throw FormatError(FormatError::Kind::Truncated,
                          "file ends inside the metadata block: " + path);
    header_.metadata = parse_metadata(meta);

    record_size_ = header_.record_size();
    data_start_ = kFixedHeaderSize + meta_len;
    const std::uint64_t payload = file_size - data_start_;
    const std::uint64_t expected = header_.n_traces * record_size_;
    if (payload < expected) {
        const std::uint64_t complete = payload / record_size_;
        throw FormatError(FormatError::Kind::Truncated,
                          "header declares " +
                              std::to_string(header_.n_traces) +
                              " records but the file ends inside record " +
                              std::to_string(complete) + ": " + path);
    }
    if (payload > expected)
        throw FormatError(FormatError::Kind::Inconsistent,
                          std::to_string(payload - expected) +
                              " trailing bytes after the declared records: " +
                              path);
    buf_.resize(record_size_);
}

bool TraceSetReader::next(TraceRecord &out) {
    if (index_ >= header_.n_traces)
        return false;
    if (!in_.read(buf_.data(), static_cast<std::streamsize>(record_size_)))
        throw FormatError(FormatError::Kind::Truncated,
                          "read failed inside record " +
                              std::to_string(index_) + ": " + path_);
    const char *p = buf_.data();
    std::memcpy(out.plaintext.data(), p, 16);
    std::memcpy(out.ciphertext.data(), p + 16, 16);
    out.samples.resize(header_.n_samples);
    for (std::uint32_t s = 0; s < header_.n_samples; ++s)
        out.samples[s] = get_f32(p + 32 + 4 * s);
    const std::uint32_t ops = header_.n_ops();
    out.variant_log.resize(ops);
    if (ops)
        std::memcpy(out.variant_log.data(), p + 32 + 4ull * header_.n_samples,
                    ops);
    ++index_;
    return true;
}

void TraceSetReader::seek(std::uint64_t record_index) {
    if (record_index > header_.n_traces)
        throw ConfigError("seek past the end: " + std::to_string(record_index));
    in_.clear();
    in_.seekg(static_cast<std::streamoff>(data_start_ +
                                          record_index * record_size_));
    if (!in_)
        throw IoError("seek failed: " + path_);
    index_ = record_index;
}

void write_traceset(const std::string &path, const TraceSetHeader &header,
                    const std::vector<TraceRecord> &records) {
    TraceSetHeader h = header;
    h.n_traces = records.size();
    TraceSetWriter w(path, h);
    for (const auto &r : records)
        w.write(r);
    w.finish();
}

std::pair<TraceSetHeader, std::vector<TraceRecord>>
read_traceset(const std::string &path) {
    TraceSetReader r(path);
    std::vector<TraceRecord> records;
    records.reserve(static_cast<std::size_t>(r.header().n_traces));
    TraceRecord rec;
    while (r.next(rec))
        records.push_back(rec);
    return {r.header(), std::move(records)};
}

} // namespace scf::store
