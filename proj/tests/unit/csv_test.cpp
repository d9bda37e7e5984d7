// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <stdexcept>

#include "reviewranker/csv.hpp"
#include "reviewranker/random.hpp"

using namespace reviewranker;

TEST_SUITE("csv") {

TEST_CASE("splits plain rows and records line numbers") {
  auto rows = csv::parse("a,b,c\n1,2,3\n");
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].fields == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1].fields == std::vector<std::string>{"1", "2", "3"});
  CHECK(rows[0].line == 1);
  CHECK(rows[1].line == 2);
}

TEST_CASE("quoted fields keep commas, quotes and newlines") {
  auto rows = csv::parse("id,text\nr1,\"a, \"\"quoted\"\"\nline\"\nr2,x\n");
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].fields[1] == "a, \"quoted\"\nline");
  CHECK(rows[2].line == 4);
}

TEST_CASE("CRLF, BOM, blank lines and a missing final newline") {
  auto rows = csv::parse("\xEF\xBB\xBFh1,h2\r\n\r\nx,y\r\nz,");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].fields[0] == "h1");
  CHECK(rows[1].fields == std::vector<std::string>{"x", "y"});
  CHECK(rows[2].fields == std::vector<std::string>{"z", ""});
}

TEST_CASE("unterminated quote is an error") {
  CHECK_THROWS_AS(csv::parse("a,\"open\n"), std::runtime_error);
}

TEST_CASE("escape quotes only when needed") {
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
  CHECK(csv::escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv::escape("two\nlines") == "\"two\nlines\"");
}

TEST_CASE("format_row then parse is the identity on random fields") {
  const std::string alphabet = "ab ,\"\n\r;x";
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> fields(1 + rng.below(5));
    for (auto& f : fields) {
      const auto len = rng.below(8);
      for (std::uint64_t i = 0; i < len; ++i) f.push_back(alphabet[rng.below(alphabet.size())]);
    }
    // A single empty field is indistinguishable from a blank line.
    if (fields.size() == 1 && fields[0].empty()) fields[0] = "q";
    auto rows = csv::parse(csv::format_row(fields));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].fields == fields);
  }
}

}
