// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "reviewranker/kernels.hpp"

namespace reviewranker::kernels {

#if defined(REVIEWRANKER_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void adam_update(double* params, const double* grads, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c);
}  // namespace avx2
#endif

#if defined(REVIEWRANKER_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void adam_update(double* params, const double* grads, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c);
}  // namespace neon
#endif

namespace {

constexpr KernelTable kScalarTable{Isa::Scalar, &scalar::dot, &scalar::axpy,
                                   &scalar::adam_update};
#if defined(REVIEWRANKER_HAVE_AVX2)
constexpr KernelTable kAvx2Table{Isa::Avx2, &avx2::dot, &avx2::axpy, &avx2::adam_update};
#endif
#if defined(REVIEWRANKER_HAVE_NEON)
constexpr KernelTable kNeonTable{Isa::Neon, &neon::dot, &neon::axpy, &neon::adam_update};
#endif

bool cpu_has_avx2() noexcept {
#if defined(REVIEWRANKER_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* best_table() noexcept {
  if (const char* env = std::getenv("REVIEWRANKER_SIMD")) {
    std::string want(env);
    if (want == "scalar") return &kScalarTable;
    if (want == "avx2" && supported(Isa::Avx2)) return table(Isa::Avx2);
    if (want == "neon" && supported(Isa::Neon)) return table(Isa::Neon);
  }
  if (supported(Isa::Avx2)) return table(Isa::Avx2);
  if (supported(Isa::Neon)) return table(Isa::Neon);
  return &kScalarTable;
}

std::atomic<const KernelTable*>& active_slot() noexcept {
  static std::atomic<const KernelTable*> slot{best_table()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "?";
}

AdamCoefficients AdamCoefficients::at_step(double learning_rate, double beta1, double beta2,
                                           double epsilon, long long t) {
  AdamCoefficients c;
  c.learning_rate = learning_rate;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.one_minus_beta1 = 1.0 - beta1;
  c.one_minus_beta2 = 1.0 - beta2;
  c.epsilon = epsilon;
  c.bias_correction1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  c.bias_correction2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  return c;
}

const KernelTable* table(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return &kScalarTable;
    case Isa::Avx2:
#if defined(REVIEWRANKER_HAVE_AVX2)
      return cpu_has_avx2() ? &kAvx2Table : nullptr;
#else
      return nullptr;
#endif
    case Isa::Neon:
#if defined(REVIEWRANKER_HAVE_NEON)
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool supported(Isa isa) noexcept { return table(isa) != nullptr; }

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Neon}) {
    if (supported(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& active() noexcept { return *active_slot().load(std::memory_order_relaxed); }

void select(Isa isa) {
  const KernelTable* t = table(isa);
  if (!t) throw std::invalid_argument("kernel ISA not available: " + std::string(isa_name(isa)));
  active_slot().store(t, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, const AdamCoefficients& c) {
  const std::size_t n = params.size();
  if (grads.size() != n || m.size() != n || v.size() != n) {
    throw std::invalid_argument("adam_update: length mismatch");
  }
  active().adam_update(params.data(), grads.data(), m.data(), v.data(), n, c);
}

}  // namespace reviewranker::kernels
