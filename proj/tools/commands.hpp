// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <iosfwd>

namespace ctqw::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDataset = 2;
inline constexpr int kExitNumeric = 3;  // also a failed gradient check
inline constexpr int kExitInternal = 4;

/// Entry point of the ctqw tool. Results go to `out`, progress and
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctqw::cli
