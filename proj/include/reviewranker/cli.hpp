// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace reviewranker::cli {

/// Entry point of the `reviewranker` binary. Subcommands: score, stats,
/// label-serve, export-labels. Returns the process exit code; diagnostics
/// go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reviewranker::cli
