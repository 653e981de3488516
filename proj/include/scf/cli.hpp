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

#include <iosfwd>
#include <string>
#include <vector>

namespace scf::cli {

// Exit codes: 0 success (a failed key recovery is a result, not a fault),
// 1 operational fault (I/O, malformed files, insufficient data), 2 usage.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFault = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command (args exclude the program name). All human output goes
/// to `out`, diagnostics to `err`; nothing touches global streams, so the
/// entry point is directly testable.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

int run(int argc, const char *const *argv, std::ostream &out,
        std::ostream &err);

} // namespace scf::cli
