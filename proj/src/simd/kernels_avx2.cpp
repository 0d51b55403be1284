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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "qcrf/simd/kernels.hpp"

namespace qcrf::simd {

const KernelTable &avx2_kernels();

namespace {

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double dot_avx2(const double *a, const double *b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double signed_dot_avx2(const double *w, const std::int8_t *s, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        std::int32_t packed;
        __builtin_memcpy(&packed, s + i, sizeof(packed));
        const __m128i s32 = _mm_cvtepi8_epi32(_mm_cvtsi32_si128(packed));
        const __m256d sign = _mm256_cvtepi32_pd(s32);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), sign, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        total += s[i] < 0 ? -w[i] : w[i];
    }
    return total;
}

void zsum_avx2(const double *coeff, std::size_t slots, double offset, std::uint64_t first,
               std::size_t count, double *out) {
    const __m256i one = _mm256_set1_epi64x(1);
    const __m256d sign_bit = _mm256_set1_pd(-0.0);
    __m256i idx = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first)),
                                   _mm256_set_epi64x(3, 2, 1, 0));
    const __m256i step = _mm256_set1_epi64x(4);
    std::size_t t = 0;
    for (; t + 4 <= count; t += 4) {
        __m256d acc = _mm256_set1_pd(offset);
        for (std::size_t s = 0; s < slots; ++s) {
            const __m256i bit = _mm256_and_si256(
                _mm256_srlv_epi64(idx, _mm256_set1_epi64x(static_cast<long long>(s))), one);
            // bit -> all-ones lane mask selecting the sign flip
            const __m256d flip = _mm256_castsi256_pd(_mm256_cmpeq_epi64(bit, one));
            const __m256d term = _mm256_xor_pd(_mm256_set1_pd(coeff[s]), _mm256_and_pd(flip, sign_bit));
            acc = _mm256_add_pd(acc, term);
        }
        _mm256_storeu_pd(out + t, acc);
        idx = _mm256_add_epi64(idx, step);
    }
    for (; t < count; ++t) {
        const std::uint64_t i = first + t;
        double acc = offset;
        for (std::size_t s = 0; s < slots; ++s) {
            acc += ((i >> s) & 1U) ? -coeff[s] : coeff[s];
        }
        out[t] = acc;
    }
}

}  // namespace

const KernelTable &avx2_kernels() {
    static const KernelTable table{Isa::avx2, dot_avx2, signed_dot_avx2, zsum_avx2};
    return table;
}

}  // namespace qcrf::simd
