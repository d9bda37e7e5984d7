// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense double-precision kernels behind the network's inner loops. Each kernel
// has a scalar reference version and optional AVX2 / NEON versions; one set is
// chosen at first use from the CPU's capabilities, or from the
// REVIEWRANKER_SIMD environment variable (scalar, avx2, neon, auto).
//
// axpy and adam_update produce bit-identical results on every ISA. dot
// reassociates its sum in the vector versions and agrees with the scalar
// reference to rounding.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace reviewranker::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa) noexcept;

struct AdamCoefficients {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double one_minus_beta1 = 0.1;
  double one_minus_beta2 = 0.001;
  double epsilon = 1e-8;
  double bias_correction1 = 1.0;  // 1 - beta1^t
  double bias_correction2 = 1.0;  // 1 - beta2^t

  static AdamCoefficients at_step(double learning_rate, double beta1, double beta2,
                                  double epsilon, long long t);
};

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // m <- b1 m + (1-b1) g; v <- b2 v + (1-b2) g^2;
  // p <- p - lr * (m / bc1) / (sqrt(v / bc2) + eps)
  void (*adam_update)(double* params, const double* grads, double* m, double* v, std::size_t n,
                      const AdamCoefficients& c);
};

/// Kernel table for `isa`, or nullptr when it was not compiled in or the CPU
/// lacks the instructions.
const KernelTable* table(Isa isa) noexcept;
bool supported(Isa isa) noexcept;
std::vector<Isa> supported_isas();

/// Currently selected table.
const KernelTable& active() noexcept;
/// Switches the active table. Throws std::invalid_argument when unsupported.
/// Not thread-safe with respect to concurrent kernel calls.
void select(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, const AdamCoefficients& c);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void adam_update(double* params, const double* grads, double* m, double* v, std::size_t n,
                 const AdamCoefficients& c);
}  // namespace scalar

}  // namespace reviewranker::kernels
