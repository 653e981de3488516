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
#include "scf/aes.hpp"

#include "scf/errors.hpp"

#include <cctype>
#include <cstddef>

namespace scf::aes {

namespace {

// FIPS-197 forward S-box.
constexpr std::uint8_t kSbox[256] = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b,
    0xfe, 0xd7, 0xab, 0x76, 0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0,
    0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0, 0xb7, 0xfd, 0x93, 0x26,
    0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2,
    0xeb, 0x27, 0xb2, 0x75, 0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0,
    0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84, 0x53, 0xd1, 0x00, 0xed,
    0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f,
    0x50, 0x3c, 0x9f, 0xa8, 0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5,
    0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2, 0xcd, 0x0c, 0x13, 0xec,
    0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14,
    0xde, 0x5e, 0x0b, 0xdb, 0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c,
    0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79, 0xe7, 0xc8, 0x37, 0x6d,
    0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f,
    0x4b, 0xbd, 0x8b, 0x8a, 0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e,
    0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e, 0xe1, 0xf8, 0x98, 0x11,
    0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f,
    0xb0, 0x54, 0xbb, 0x16,
};

constexpr std::uint8_t kRcon[10] = {0x01, 0x02, 0x04, 0x08, 0x10,
                                    0x20, 0x40, 0x80, 0x1b, 0x36};

constexpr std::uint8_t xtime(std::uint8_t x) noexcept {
    return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

} // namespace

const char *op_name(Op op) noexcept {
    switch (op) {
    case Op::AddRoundKey:
        return "OP-1";
    case Op::SubBytes:
        return "OP-2";
    case Op::ShiftRows:
        return "OP-3";
    case Op::MixColumns:
        return "OP-4";
    }
    return "OP-?";
}

std::uint8_t sbox_lookup(std::uint8_t b) noexcept { return kSbox[b]; }

RoundKeys key_expansion(const Key128 &key) noexcept {
    RoundKeys rk;
    rk[0] = key;
    for (int r = 1; r <= 10; ++r) {
        const Block128 &prev = rk[r - 1];
        Block128 &cur = rk[r];
        // Word 0: RotWord + SubWord of the previous schedule word, plus Rcon.
        cur[0] = static_cast<std::uint8_t>(prev[0] ^ kSbox[prev[13]] ^
                                           kRcon[r - 1]);
        cur[1] = static_cast<std::uint8_t>(prev[1] ^ kSbox[prev[14]]);
        cur[2] = static_cast<std::uint8_t>(prev[2] ^ kSbox[prev[15]]);
        cur[3] = static_cast<std::uint8_t>(prev[3] ^ kSbox[prev[12]]);
        for (int i = 4; i < 16; ++i)
            cur[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
                prev[static_cast<std::size_t>(i)] ^
                cur[static_cast<std::size_t>(i - 4)]);
    }
    return rk;
}

void sub_bytes(Block128 &state) noexcept {
    for (auto &b : state)
        b = kSbox[b];
}

void shift_rows(Block128 &state) noexcept {
    // Row r (cells r, r+4, r+8, r+12) rotates left by r.
    Block128 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            out[static_cast<std::size_t>(r + 4 * c)] =
                state[static_cast<std::size_t>(r + 4 * ((c + r) % 4))];
    state = out;
}

void mix_columns(Block128 &state) noexcept {
    for (int c = 0; c < 4; ++c) {
        std::uint8_t *col = state.data() + 4 * c;
        const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
        const std::uint8_t t =
            static_cast<std::uint8_t>(a0 ^ a1 ^ a2 ^ a3);
        col[0] = static_cast<std::uint8_t>(
            a0 ^ t ^ xtime(static_cast<std::uint8_t>(a0 ^ a1)));
        col[1] = static_cast<std::uint8_t>(
            a1 ^ t ^ xtime(static_cast<std::uint8_t>(a1 ^ a2)));
        col[2] = static_cast<std::uint8_t>(
            a2 ^ t ^ xtime(static_cast<std::uint8_t>(a2 ^ a3)));
        col[3] = static_cast<std::uint8_t>(
            a3 ^ t ^ xtime(static_cast<std::uint8_t>(a3 ^ a0)));
    }
}

void add_round_key(Block128 &state, const Block128 &rk) noexcept {
    for (int i = 0; i < 16; ++i)
        state[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
            state[static_cast<std::size_t>(i)] ^
            rk[static_cast<std::size_t>(i)]);
}

namespace {

Block128 encrypt_impl(const Block128 &pt, const Key128 &key,
                      IntermediateTrace *record) noexcept {
    const RoundKeys rk = key_expansion(key);
    Block128 state = pt;
    int slot = 0;
    auto log = [&](int round, Op op) {
        if (record)
            record->records[static_cast<std::size_t>(slot)] = {round, op,
                                                               state};
        ++slot;
    };

    add_round_key(state, rk[0]);
    log(0, Op::AddRoundKey);
    for (int r = 1; r <= 9; ++r) {
        sub_bytes(state);
        log(r, Op::SubBytes);
        shift_rows(state);
        log(r, Op::ShiftRows);
        mix_columns(state);
        log(r, Op::MixColumns);
        add_round_key(state, rk[static_cast<std::size_t>(r)]);
        log(r, Op::AddRoundKey);
    }
    sub_bytes(state);
    log(10, Op::SubBytes);
    shift_rows(state);
    log(10, Op::ShiftRows);
    add_round_key(state, rk[10]);
    log(10, Op::AddRoundKey);
    return state;
}

} // namespace

Block128 encrypt_block(const Block128 &pt, const Key128 &key) noexcept {
    return encrypt_impl(pt, key, nullptr);
}

Block128 encrypt_block(const Block128 &pt, const Key128 &key,
                       IntermediateTrace &record) noexcept {
    return encrypt_impl(pt, key, &record);
}

std::string to_hex(const Block128 &b) {
    static const char *digits = "0123456789abcdef";
    std::string out(32, '0');
    for (int i = 0; i < 16; ++i) {
        out[static_cast<std::size_t>(2 * i)] =
            digits[b[static_cast<std::size_t>(i)] >> 4];
        out[static_cast<std::size_t>(2 * i + 1)] =
            digits[b[static_cast<std::size_t>(i)] & 0x0f];
    }
    return out;
}

Block128 parse_hex_block(const std::string &hex) {
    if (hex.size() != 32)
        throw ConfigError("expected 32 hex characters, got " +
                          std::to_string(hex.size()) + " in \"" + hex + "\"");
    auto nibble = [&](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9')
            return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f')
            return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F')
            return static_cast<std::uint8_t>(c - 'A' + 10);
        throw ConfigError(std::string("invalid hex character '") + c + "'");
    };
    Block128 out{};
    for (int i = 0; i < 16; ++i)
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(
            (nibble(hex[static_cast<std::size_t>(2 * i)]) << 4) |
            nibble(hex[static_cast<std::size_t>(2 * i + 1)]));
    return out;
}

} // namespace scf::aes
