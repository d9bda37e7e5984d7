// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstring>

#include "reviewranker/kernels.hpp"
#include "reviewranker/random.hpp"

using namespace reviewranker;
using namespace reviewranker::kernels;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Lengths around the vector widths, so every tail path runs.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100, 1031};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("scalar kernels against naive loops") {
  Rng rng(41);
  for (std::size_t n : kLengths) {
    auto a = random_vector(rng, n), b = random_vector(rng, n);
    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) expected += a[i] * b[i];
    CHECK(scalar::dot(a.data(), b.data(), n) == expected);

    auto y = b;
    scalar::axpy(0.5, a.data(), y.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y[i] == b[i] + 0.5 * a[i]);
  }
}

TEST_CASE("scalar is always available and is the fallback") {
  CHECK(supported(Isa::Scalar));
  REQUIRE(table(Isa::Scalar) != nullptr);
  CHECK(table(Isa::Scalar)->isa == Isa::Scalar);
  const auto isas = supported_isas();
  CHECK(std::find(isas.begin(), isas.end(), Isa::Scalar) != isas.end());
  CHECK(isa_name(Isa::Avx2) == "avx2");
}

TEST_CASE("every compiled variant matches the scalar reference") {
  for (Isa isa : supported_isas()) {
    CAPTURE(isa_name(isa));
    const KernelTable* k = table(isa);
    REQUIRE(k != nullptr);
    Rng rng(42);
    for (std::size_t n : kLengths) {
      CAPTURE(n);
      auto a = random_vector(rng, n, 10.0), b = random_vector(rng, n, 10.0);

      // dot reassociates; compare against the exact-ish scale of the terms.
      double magnitude = 0.0;
      for (std::size_t i = 0; i < n; ++i) magnitude += std::abs(a[i] * b[i]);
      const double ref = scalar::dot(a.data(), b.data(), n);
      CHECK(std::abs(k->dot(a.data(), b.data(), n) - ref) <= 1e-14 * (magnitude + 1.0));

      auto y_ref = b, y = b;
      scalar::axpy(-1.75, a.data(), y_ref.data(), n);
      k->axpy(-1.75, a.data(), y.data(), n);
      CHECK(bitwise_equal(y, y_ref));

      auto p_ref = a, p = a;
      auto g = random_vector(rng, n);
      auto m_ref = random_vector(rng, n, 0.1), m = m_ref;
      std::vector<double> v_ref(n);
      for (auto& x : v_ref) x = rng.uniform(0.0, 0.01);
      auto v = v_ref;
      for (long long t = 1; t <= 3; ++t) {
        const auto c = AdamCoefficients::at_step(1e-3, 0.9, 0.999, 1e-8, t);
        scalar::adam_update(p_ref.data(), g.data(), m_ref.data(), v_ref.data(), n, c);
        k->adam_update(p.data(), g.data(), m.data(), v.data(), n, c);
      }
      CHECK(bitwise_equal(p, p_ref));
      CHECK(bitwise_equal(m, m_ref));
      CHECK(bitwise_equal(v, v_ref));
    }
  }
}

TEST_CASE("select switches the active table") {
  const Isa original = active().isa;
  select(Isa::Scalar);
  CHECK(active().isa == Isa::Scalar);
  std::vector<double> a{1, 2, 3}, b{4, 5, 6};
  CHECK(dot(a, b) == 32.0);
  for (Isa isa : supported_isas()) {
    select(isa);
    CHECK(active().isa == isa);
    CHECK(dot(a, b) == 32.0);
  }
  select(original);
#if !defined(__aarch64__)
  CHECK_THROWS_AS(select(Isa::Neon), std::invalid_argument);
#endif
}

TEST_CASE("span wrappers check lengths") {
  std::vector<double> a(3), b(4);
  CHECK_THROWS(dot(a, b));
  CHECK_THROWS(axpy(1.0, a, b));
}

TEST_CASE("Adam coefficients") {
  const auto c = AdamCoefficients::at_step(0.01, 0.9, 0.999, 1e-8, 2);
  CHECK(c.learning_rate == 0.01);
  CHECK(c.bias_correction1 == doctest::Approx(1.0 - 0.81));
  CHECK(c.bias_correction2 == doctest::Approx(1.0 - 0.999 * 0.999));
  CHECK(c.one_minus_beta1 == doctest::Approx(0.1));
}

}
