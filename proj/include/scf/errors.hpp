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

#include <stdexcept>
#include <string>

namespace scf {

/// Invalid model, bank, or layout parameters, or misuse of the library surface.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Filesystem-level failure; the message carries the offending path.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed trace container contents.
class FormatError : public std::runtime_error {
  public:
    enum class Kind { BadMagic, UnsupportedDtype, Truncated, Inconsistent };

    FormatError(Kind kind, const std::string &msg)
        : std::runtime_error(msg), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

/// The operation needs more data than the caller supplied (e.g. a key
/// recovery over fewer than 2 traces).
class InsufficientData : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace scf
