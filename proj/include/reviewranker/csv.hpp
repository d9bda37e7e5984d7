// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace reviewranker::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain commas, doubled quotes and line
/// breaks. Accepts LF and CRLF. Blank lines are skipped. Throws
/// std::runtime_error on an unterminated quoted field.
std::vector<Row> parse(std::string_view content);

/// Quotes a field only when it needs it.
std::string escape(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace reviewranker::csv
