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

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

// Bit-exact little-endian trace container:
//
//   offset  size  field
//        0     8  magic "SCFTRC01"
//        8     8  n_traces (u64 LE)
//       16     4  n_samples (u32 LE)
//       20     1  sample_dtype (0 = IEEE-754 binary32 LE)
//       21     1  flags (bit0 = records carry a variant log)
//       22     4  metadata_len (u32 LE)
//       26     m  metadata, UTF-8 "key=value\n" lines with sorted keys
//
// followed by n_traces fixed-size records:
//
//   16 plaintext | 16 ciphertext | n_samples * f32 | [n_ops * u8 variant log]
//
// Records are fixed-size, so readers can seek to any trace index; that is
// what the partition-and-merge attack path relies on.

namespace scf::store {

inline constexpr char kMagic[8] = {'S', 'C', 'F', 'T', 'R', 'C', '0', '1'};
inline constexpr std::uint8_t kDtypeF32 = 0;
inline constexpr std::uint8_t kFlagVariantLog = 0x01;
inline constexpr std::uint64_t kFixedHeaderSize = 26;

struct TraceSetHeader {
    std::uint64_t n_traces = 0;
    std::uint32_t n_samples = 0;
    std::uint8_t sample_dtype = kDtypeF32;
    std::uint8_t flags = 0;
    std::map<std::string, std::string> metadata;

    bool has_variant_log() const noexcept {
        return (flags & kFlagVariantLog) != 0;
    }
    /// Variant-log length per record; parsed from the mandatory n_ops
    /// metadata key when the flag is set, 0 otherwise.
    std::uint32_t n_ops() const;
    std::uint64_t record_size() const;
};

struct TraceRecord {
    aes::Block128 plaintext{};
    aes::Block128 ciphertext{};
    std::vector<float> samples;
    std::vector<std::uint8_t> variant_log;

    bool operator==(const TraceRecord &) const = default;
};

/// Streaming writer. Expects exactly header.n_traces records before
/// finish(); rewriting the same logical content yields identical bytes.
class TraceSetWriter {
  public:
    TraceSetWriter(const std::string &path, const TraceSetHeader &header);
    ~TraceSetWriter();

    void write(const TraceRecord &record);
    void finish();

  private:
    std::string path_;
    TraceSetHeader header_;
    std::ofstream out_;
    std::uint64_t written_ = 0;
    bool finished_ = false;
    std::vector<char> buf_;
};

/// Streaming reader; holds one record of buffer regardless of file size.
class TraceSetReader {
  public:
    explicit TraceSetReader(const std::string &path);

    const TraceSetHeader &header() const noexcept { return header_; }
    std::uint64_t record_size() const noexcept { return record_size_; }

    /// Next record in write order; false after n_traces records.
    bool next(TraceRecord &out);
    /// Position the cursor on `record_index`.
    void seek(std::uint64_t record_index);
    std::uint64_t position() const noexcept { return index_; }

  private:
    std::string path_;
    std::ifstream in_;
    TraceSetHeader header_;
    std::uint64_t record_size_ = 0;
    std::uint64_t data_start_ = 0;
    std::uint64_t index_ = 0;
    std::vector<char> buf_;
};

/// Convenience whole-file forms for small sets (tests, inspection).
void write_traceset(const std::string &path, const TraceSetHeader &header,
                    const std::vector<TraceRecord> &records);
std::pair<TraceSetHeader, std::vector<TraceRecord>>
read_traceset(const std::string &path);

std::string serialize_metadata(const std::map<std::string, std::string> &meta);
std::map<std::string, std::string> parse_metadata(const std::string &text);

} // namespace scf::store
