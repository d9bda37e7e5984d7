// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include "reviewranker/corpus.hpp"
#include "reviewranker/labelserve.hpp"

namespace reviewranker::labelserve::detail {

// Field names follow the corpus file format.
nlohmann::ordered_json label_to_json(const corpus::ReviewLabel& label);
/// Parses label fields from a request body or log line. Problems are
/// appended to `errors`.
corpus::ReviewLabel label_from_json(const nlohmann::json& j, std::vector<FieldError>& errors);
nlohmann::ordered_json review_to_json(const corpus::Review& review);
std::string utc_timestamp();

}  // namespace reviewranker::labelserve::detail
