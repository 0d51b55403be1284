// Copyright 2026 The QCRF Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Data-parallel inner loops used by the model and the simulator. Every kernel
// has a scalar reference implementation; wider variants are selected once at
// startup from the CPU feature flags (override with QCRF_SIMD=scalar|avx2).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace qcrf::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
    Isa isa;
    /// sum_i a[i] * b[i]
    double (*dot)(const double *a, const double *b, std::size_t n);
    /// sum_i w[i] * s[i] with s[i] in {-1, +1}
    double (*signed_dot)(const double *w, const std::int8_t *s, std::size_t n);
    /// out[t] = offset + sum_s coeff[s] * (-1)^bit_s(first + t), t in [0, count)
    ///
    /// Terms are accumulated in slot order for every variant, so all variants
    /// agree bit for bit.
    void (*zsum)(const double *coeff, std::size_t slots, double offset, std::uint64_t first,
                 std::size_t count, double *out);
};

const KernelTable &scalar_kernels();

bool isa_available(Isa isa);
std::string_view isa_name(Isa isa);
std::vector<Isa> available_isas();

/// Kernel table for a specific instruction set. Throws if unavailable.
const KernelTable &kernels_for(Isa isa);

/// The active table.
const KernelTable &kernels();

/// Replaces the active table; returns the previous ISA. Intended for tests.
Isa select_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
    return kernels().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline double signed_dot(std::span<const double> w, std::span<const std::int8_t> s) {
    return kernels().signed_dot(w.data(), s.data(), w.size() < s.size() ? w.size() : s.size());
}

inline void zsum(std::span<const double> coeff, double offset, std::uint64_t first,
                 std::span<double> out) {
    kernels().zsum(coeff.data(), coeff.size(), offset, first, out.size(), out.data());
}

}  // namespace qcrf::simd
