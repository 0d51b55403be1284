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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "qcrf/simd/kernels.hpp"

namespace qcrf::simd {

#ifdef QCRF_HAVE_AVX2
const KernelTable &avx2_kernels();
#endif

namespace {

bool cpu_has_avx2() {
#if defined(QCRF_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable *initial_table() {
    Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    if (const char *env = std::getenv("QCRF_SIMD")) {
        const std::string choice(env);
        if (choice == "scalar") {
            isa = Isa::scalar;
        } else if (choice == "avx2" && cpu_has_avx2()) {
            isa = Isa::avx2;
        }
    }
    return &kernels_for(isa);
}

std::atomic<const KernelTable *> &active() {
    static std::atomic<const KernelTable *> table{initial_table()};
    return table;
}

}  // namespace

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return true;
        case Isa::avx2:
            return cpu_has_avx2();
    }
    return false;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return "scalar";
        case Isa::avx2:
            return "avx2";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::scalar};
    if (isa_available(Isa::avx2)) {
        out.push_back(Isa::avx2);
    }
    return out;
}

const KernelTable &kernels_for(Isa isa) {
    switch (isa) {
        case Isa::scalar:
            return scalar_kernels();
        case Isa::avx2:
#ifdef QCRF_HAVE_AVX2
            if (cpu_has_avx2()) {
                return avx2_kernels();
            }
#endif
            break;
    }
    throw std::invalid_argument("kernel variant not available on this machine: " +
                                std::string(isa_name(isa)));
}

const KernelTable &kernels() { return *active().load(std::memory_order_acquire); }

Isa select_isa(Isa isa) {
    const KernelTable *next = &kernels_for(isa);
    return active().exchange(next, std::memory_order_acq_rel)->isa;
}

}  // namespace qcrf::simd
