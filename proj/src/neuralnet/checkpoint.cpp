// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "reviewranker/neuralnet.hpp"

namespace reviewranker::nn {

namespace {
constexpr const char* kFormat = "reviewranker.model";
constexpr int kVersion = 1;
}  // namespace

std::string checkpoint_to_string(const ModelParams& params) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["layer_sizes"] = params.layer_sizes();
  j["values"] = std::vector<double>(params.values().begin(), params.values().end());
  return j.dump() + "\n";
}

ModelParams checkpoint_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::runtime_error(std::string("checkpoint is not valid JSON: ") + err.what());
  }
  if (j.value("format", "") != kFormat) throw std::runtime_error("not a model checkpoint");
  if (j.value("version", 0) != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(j.value("version", 0)));
  }
  ModelParams params(j.at("layer_sizes").get<std::vector<std::size_t>>());
  const auto& values = j.at("values");
  if (!values.is_array() || values.size() != params.values().size()) {
    throw std::runtime_error("checkpoint value count does not match layer sizes");
  }
  for (std::size_t i = 0; i < values.size(); ++i) params.values()[i] = values[i].get<double>();
  if (!params.all_finite()) throw std::runtime_error("checkpoint contains non-finite values");
  return params;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << checkpoint_to_string(params);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace reviewranker::nn
