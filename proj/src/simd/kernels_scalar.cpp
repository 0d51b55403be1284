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

#include "qcrf/simd/kernels.hpp"

namespace qcrf::simd {
namespace {

double dot_scalar(const double *a, const double *b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double signed_dot_scalar(const double *w, const std::int8_t *s, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += s[i] < 0 ? -w[i] : w[i];
    }
    return acc;
}

void zsum_scalar(const double *coeff, std::size_t slots, double offset, std::uint64_t first,
                 std::size_t count, double *out) {
    for (std::size_t t = 0; t < count; ++t) {
        const std::uint64_t idx = first + t;
        double acc = offset;
        for (std::size_t s = 0; s < slots; ++s) {
            acc += ((idx >> s) & 1U) ? -coeff[s] : coeff[s];
        }
        out[t] = acc;
    }
}

}  // namespace

const KernelTable &scalar_kernels() {
    static const KernelTable table{Isa::scalar, dot_scalar, signed_dot_scalar, zsum_scalar};
    return table;
}

}  // namespace qcrf::simd
