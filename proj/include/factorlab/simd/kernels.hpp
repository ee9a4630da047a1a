// Copyright 2026 The Factorlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Data-parallel inner loops shared by the norm, pairing and matrix code.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, a vectorized variant. The variant is picked once at startup
// from the CPU feature bits; set FACTORLAB_KERNELS=scalar in the environment
// (or call force_isa) to pin the reference path. Vectorized reductions
// associate differently from the scalar loops, so results agree to a few
// ulps rather than bit for bit; max-type reductions and elementwise kernels
// agree exactly.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace factorlab::simd {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa);

/// Best variant the running CPU supports.
Isa detected_isa();
/// Variant currently used by the dispatching entry points below.
Isa active_isa();
/// Pin the dispatch to a variant. Requesting an unsupported variant falls
/// back to scalar; the variant actually installed is returned.
Isa force_isa(Isa isa);

/// Function table for one instruction set. All spans in a call must have
/// equal length; the dispatching wrappers check this.
struct KernelTable {
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*abs_sum)(const double* x, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += |x|
  void (*add_abs)(const double* x, double* y, std::size_t n);
  double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
};

const KernelTable& scalar_kernels();
/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

double dot(std::span<const double> x, std::span<const double> y);
double abs_sum(std::span<const double> x);
double max_abs(std::span<const double> x);
double sum_sq(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void add_abs(std::span<const double> x, std::span<double> y);
double max_abs_diff(std::span<const double> x, std::span<const double> y);

}  // namespace factorlab::simd
