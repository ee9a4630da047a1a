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

#include <atomic>
#include <cstdlib>
#include <string>

#include "factorlab/errors.hpp"
#include "factorlab/simd/kernels.hpp"

namespace factorlab::simd {

#if defined(FACTORLAB_HAVE_AVX2)
const KernelTable* avx2_kernels_table();
#endif
#if defined(FACTORLAB_HAVE_NEON)
const KernelTable* neon_kernels_table();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(FACTORLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      return avx2_kernels();
    case Isa::neon:
      return neon_kernels();
    case Isa::scalar:
      return &scalar_kernels();
  }
  return &scalar_kernels();
}

struct Active {
  std::atomic<const KernelTable*> table;
  std::atomic<Isa> isa;

  Active() {
    Isa want = detected_isa();
    if (const char* env = std::getenv("FACTORLAB_KERNELS")) {
      if (std::string(env) == "scalar") want = Isa::scalar;
    }
    const KernelTable* t = table_for(want);
    if (t == nullptr) {
      want = Isa::scalar;
      t = &scalar_kernels();
    }
    table.store(t);
    isa.store(want);
  }
};

Active& active() {
  static Active a;
  return a;
}

inline const KernelTable& k() { return *active().table.load(std::memory_order_relaxed); }

inline void same_length(std::size_t a, std::size_t b) {
  require(a == b, ErrorKind::DimensionMismatch,
          "kernel operands differ in length: " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "scalar";
}

const KernelTable* avx2_kernels() {
#if defined(FACTORLAB_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? avx2_kernels_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(FACTORLAB_HAVE_NEON)
  return neon_kernels_table();
#else
  return nullptr;
#endif
}

Isa detected_isa() {
  if (avx2_kernels() != nullptr) return Isa::avx2;
  if (neon_kernels() != nullptr) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return active().isa.load(); }

Isa force_isa(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr) {
    isa = Isa::scalar;
    t = &scalar_kernels();
  }
  active().table.store(t);
  active().isa.store(isa);
  return isa;
}

double dot(std::span<const double> x, std::span<const double> y) {
  same_length(x.size(), y.size());
  return k().dot(x.data(), y.data(), x.size());
}

double abs_sum(std::span<const double> x) { return k().abs_sum(x.data(), x.size()); }

double max_abs(std::span<const double> x) { return k().max_abs(x.data(), x.size()); }

double sum_sq(std::span<const double> x) { return k().sum_sq(x.data(), x.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  same_length(x.size(), y.size());
  k().axpy(alpha, x.data(), y.data(), x.size());
}

void add_abs(std::span<const double> x, std::span<double> y) {
  same_length(x.size(), y.size());
  k().add_abs(x.data(), y.data(), x.size());
}

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  same_length(x.size(), y.size());
  return k().max_abs_diff(x.data(), y.data(), x.size());
}

}  // namespace factorlab::simd
