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
#include <cstdint>
#include <string>

namespace scf::aes {

/// 16 octets in FIPS-197 order: byte i is state cell (row i%4, column i/4).
using Block128 = std::array<std::uint8_t, 16>;
using Key128 = std::array<std::uint8_t, 16>;

/// The 11 round keys of the AES-128 schedule; keys[0] is the cipher key.
using RoundKeys = std::array<Block128, 11>;

enum class Op : std::uint8_t {
    AddRoundKey = 0,
    SubBytes = 1,
    ShiftRows = 2,
    MixColumns = 3,
};

const char *op_name(Op op) noexcept; // "OP-1".."OP-4"

/// Number of state-mutating operations in one AES-128 encryption: the
/// initial AddRoundKey, nine rounds of SubBytes/ShiftRows/MixColumns/
/// AddRoundKey, and the final round without MixColumns.
inline constexpr int kOpCount = 40;

struct OpRecord {
    int round;     // 0 for the initial AddRoundKey, then 1..10
    Op op;
    Block128 state; // state after the operation
};

/// Chronological per-operation states of one encryption. Index 0 is the
/// initial AddRoundKey; index 1 is the round-1 SubBytes output, the attack
/// point of the key recovery.
struct IntermediateTrace {
    std::array<OpRecord, kOpCount> records;
};

inline constexpr int kAttackOpIndex = 1;

std::uint8_t sbox_lookup(std::uint8_t b) noexcept;

RoundKeys key_expansion(const Key128 &key) noexcept;

Block128 encrypt_block(const Block128 &pt, const Key128 &key) noexcept;
Block128 encrypt_block(const Block128 &pt, const Key128 &key,
                       IntermediateTrace &record) noexcept;

/// First-round SubBytes output for one byte position: sbox(pt ^ k). The
/// quantity the key recovery hypothesizes per guess.
inline std::uint8_t attack_point_value(std::uint8_t pt_byte,
                                       std::uint8_t key_byte) noexcept {
    return sbox_lookup(static_cast<std::uint8_t>(pt_byte ^ key_byte));
}

// Primitive round operations, exposed so tests can replay recorded
// intermediate states forward to the ciphertext.
void sub_bytes(Block128 &state) noexcept;
void shift_rows(Block128 &state) noexcept;
void mix_columns(Block128 &state) noexcept;
void add_round_key(Block128 &state, const Block128 &rk) noexcept;

/// Lowercase 32-char hex.
std::string to_hex(const Block128 &b);
/// Parses 32 hex chars (case-insensitive); throws ConfigError otherwise.
Block128 parse_hex_block(const std::string &hex);

} // namespace scf::aes
