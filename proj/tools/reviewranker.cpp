// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "reviewranker/cli.hpp"

int main(int argc, char** argv) {
  return reviewranker::cli::run(argc, argv, std::cout, std::cerr);
}
