// Copyright 2026 The polarmat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polarmat {

enum class ErrorCode {
    LengthMismatch,
    InvalidCount,
    InvalidSignal,
    InvalidArgument,
    DegenerateVector,
    BelowHorizon,
    DimensionMismatch,
    EmptySignal,
    UnsupportedBackend,
    ParseError,
    MissingFile,
    UnsupportedVersion,
    IoError,
    CorruptImage,
};

std::string_view to_string(ErrorCode code);

/// Every failure surfaced by the library. `what()` is prefixed with the code
/// name so messages stay attributable when they reach the CLI.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// Same error with `context` inserted after the code name, e.g.
    /// "ParseError: stage 'init': ...".
    Error with_context(std::string_view context) const;

private:
    struct Verbatim {};
    Error(ErrorCode code, const std::string& full, Verbatim) : std::runtime_error(full), code_(code) {}

    ErrorCode code_;
};

}  // namespace polarmat
