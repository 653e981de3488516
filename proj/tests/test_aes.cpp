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

#include <doctest.h>

#include <set>

using namespace scf;

namespace {

const aes::Key128 kFipsKey =
    aes::parse_hex_block("000102030405060708090a0b0c0d0e0f");
const aes::Block128 kFipsPt =
    aes::parse_hex_block("00112233445566778899aabbccddeeff");
const aes::Block128 kFipsCt =
    aes::parse_hex_block("69c4e0d86a7b0430d8cdb78070b4c55a");

} // namespace

TEST_CASE("known-answer vectors") {
    CHECK(aes::encrypt_block(kFipsPt, kFipsKey) == kFipsCt);

    const aes::Key128 zero{};
    CHECK(aes::encrypt_block(aes::Block128{}, zero) ==
          aes::parse_hex_block("66e94bd4ef8a2c3b884cfa59ca342b2e"));

    CHECK(aes::encrypt_block(
              aes::parse_hex_block("3243f6a8885a308d313198a2e0370734"),
              aes::parse_hex_block("2b7e151628aed2a6abf7158809cf4f3c")) ==
          aes::parse_hex_block("3925841d02dc09fbdc118597196a0b32"));
}

TEST_CASE("s-box is a bijection with the expected fixed points") {
    std::set<std::uint8_t> image;
    for (int v = 0; v < 256; ++v)
        image.insert(aes::sbox_lookup(static_cast<std::uint8_t>(v)));
    CHECK(image.size() == 256);
    CHECK(aes::sbox_lookup(0x00) == 0x63);
    CHECK(aes::sbox_lookup(0x52) == 0x00);
    CHECK(aes::sbox_lookup(0x63) == 0xfb);
}

TEST_CASE("key expansion round keys") {
    const aes::RoundKeys rk = aes::key_expansion(
        aes::parse_hex_block("2b7e151628aed2a6abf7158809cf4f3c"));
    CHECK(rk[0] == aes::parse_hex_block("2b7e151628aed2a6abf7158809cf4f3c"));
    CHECK(rk[10] ==
          aes::parse_hex_block("d014f9a8c9ee2589e13f0cc8b6630ca6"));

    const aes::RoundKeys zero = aes::key_expansion(aes::Key128{});
    CHECK(zero[1] ==
          aes::parse_hex_block("62636363626363636263636362636363"));
}

TEST_CASE("recorded encryption matches the plain one and replays cleanly") {
    aes::IntermediateTrace trace;
    const aes::Block128 ct = aes::encrypt_block(kFipsPt, kFipsKey, trace);
    CHECK(ct == kFipsCt);
    CHECK(ct == aes::encrypt_block(kFipsPt, kFipsKey));

    const aes::RoundKeys rk = aes::key_expansion(kFipsKey);

    // Slot layout: whitening, then nine full rounds, then the short round.
    CHECK(trace.records[0].op == aes::Op::AddRoundKey);
    CHECK(trace.records[0].round == 0);
    CHECK(trace.records[1].op == aes::Op::SubBytes);
    CHECK(trace.records[1].round == 1);
    CHECK(trace.records[38].op == aes::Op::ShiftRows);
    CHECK(trace.records[39].op == aes::Op::AddRoundKey);
    CHECK(trace.records[39].round == 10);
    for (std::size_t i = 1; i + 3 < 37; i += 4) {
        CHECK(trace.records[i].op == aes::Op::SubBytes);
        CHECK(trace.records[i + 1].op == aes::Op::ShiftRows);
        CHECK(trace.records[i + 2].op == aes::Op::MixColumns);
        CHECK(trace.records[i + 3].op == aes::Op::AddRoundKey);
    }

    // Each recorded state is the previous one with its op applied.
    aes::Block128 s = kFipsPt;
    aes::add_round_key(s, rk[0]);
    CHECK(trace.records[0].state == s);
    for (std::size_t i = 1; i < static_cast<std::size_t>(aes::kOpCount); ++i) {
        s = trace.records[i - 1].state;
        switch (trace.records[i].op) {
        case aes::Op::AddRoundKey:
            aes::add_round_key(
                s, rk[static_cast<std::size_t>(trace.records[i].round)]);
            break;
        case aes::Op::SubBytes:
            aes::sub_bytes(s);
            break;
        case aes::Op::ShiftRows:
            aes::shift_rows(s);
            break;
        case aes::Op::MixColumns:
            aes::mix_columns(s);
            break;
        }
        CHECK(trace.records[i].state == s);
    }
    CHECK(trace.records[static_cast<std::size_t>(aes::kOpCount) - 1].state == ct);
}

TEST_CASE("first-round attack point matches the recorded state") {
    aes::IntermediateTrace trace;
    (void)aes::encrypt_block(kFipsPt, kFipsKey, trace);
    for (std::size_t b = 0; b < 16; ++b)
        CHECK(aes::attack_point_value(kFipsPt[b], kFipsKey[b]) ==
              trace.records[aes::kAttackOpIndex].state[b]);
    CHECK(aes::attack_point_value(0x00, 0x00) == 0x63);
    CHECK(aes::attack_point_value(0x53, 0x01) == aes::sbox_lookup(0x52));
}

TEST_CASE("hex helpers round-trip and reject junk") {
    CHECK(aes::to_hex(kFipsCt) == "69c4e0d86a7b0430d8cdb78070b4c55a");
    CHECK(aes::parse_hex_block(aes::to_hex(kFipsKey)) == kFipsKey);
    CHECK(aes::parse_hex_block("69C4E0D86A7B0430D8CDB78070B4C55A") ==
          kFipsCt);
    CHECK_THROWS_AS((void)aes::parse_hex_block("00"), ConfigError);
    CHECK_THROWS_AS(
        (void)aes::parse_hex_block("zz112233445566778899aabbccddeeff"),
        ConfigError);
}
