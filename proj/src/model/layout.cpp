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

#include "qcrf/model/layout.hpp"

#include <string>

#include "qcrf/errors.hpp"

namespace qcrf::model {

namespace {
int ceil_log2(int q) {
    int bits = 0;
    while ((1 << bits) < q) {
        ++bits;
    }
    return bits;
}
}  // namespace

RegisterLayout::RegisterLayout(int n, int K, int Q, Mode mode)
    : n_(n), K_(K), Q_(Q), mode_(mode), label_bits_(ceil_log2(Q)), dimension_(0) {
    if (n < 1 || K < 1 || Q < 1) {
        throw DimensionError("register layout needs n, K, Q >= 1");
    }
    if (total_bits() > 62) {
        throw DimensionError("register layout needs " + std::to_string(total_bits()) + " bits; at most 62 supported");
    }
    std::uint64_t configs = 1;
    if (mode == Mode::free) {
        for (int i = 0; i < n; ++i) {
            configs *= static_cast<std::uint64_t>(Q);
        }
    }
    dimension_ = configs << feature_bits();
}

int RegisterLayout::label_of(std::uint64_t index, int i) const {
    if (mode_ == Mode::clamped || label_bits_ == 0) {
        return 0;
    }
    const int shift = feature_bits() + i * label_bits_;
    return static_cast<int>((index >> shift) & ((std::uint64_t{1} << label_bits_) - 1));
}

bool RegisterLayout::is_valid(std::uint64_t index) const {
    if (total_bits() < 64 && (index >> total_bits()) != 0) {
        return false;
    }
    if (mode_ == Mode::free) {
        for (int i = 0; i < n_; ++i) {
            if (label_of(index, i) >= Q_) {
                return false;
            }
        }
    }
    return true;
}

std::uint64_t RegisterLayout::compose(std::span<const int> labels, std::uint64_t bits) const {
    std::uint64_t index = bits & feature_mask();
    if (mode_ == Mode::free) {
        if (static_cast<int>(labels.size()) != n_) {
            throw DimensionError("compose: expected " + std::to_string(n_) + " labels");
        }
        for (int i = 0; i < n_; ++i) {
            const int j = labels[static_cast<std::size_t>(i)];
            if (j < 0 || j >= Q_) {
                throw DomainError("compose: label index out of range");
            }
            index |= static_cast<std::uint64_t>(j) << (feature_bits() + i * label_bits_);
        }
    }
    return index;
}

std::uint64_t RegisterLayout::basis_index(std::uint64_t ordinal) const {
    const std::uint64_t bits = ordinal & feature_mask();
    if (mode_ == Mode::clamped) {
        return bits;
    }
    std::uint64_t rest = ordinal >> feature_bits();
    std::uint64_t index = bits;
    for (int i = 0; i < n_; ++i) {
        const std::uint64_t j = rest % static_cast<std::uint64_t>(Q_);
        rest /= static_cast<std::uint64_t>(Q_);
        index |= j << (feature_bits() + i * label_bits_);
    }
    return index;
}

}  // namespace qcrf::model
