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

#include <cstdint>
#include <span>
#include <vector>

namespace qcrf::model {

enum class Mode {
    clamped,  ///< feature-sign qubits only, dimension 2^(nK)
    free,     ///< n label registers adjoined, dimension Q^n 2^(nK)
};

/// Bit layout of the composite register.
///
/// Feature qubit (k, i) is bit i*K + k of the basis index. In free mode the
/// label register of position i occupies `label_bits` bits starting at
/// nK + i*label_bits. Label register values >= Q are not basis states of the
/// model and are skipped by every iteration.
class RegisterLayout {
   public:
    RegisterLayout(int n, int K, int Q, Mode mode);

    int positions() const { return n_; }
    int features() const { return K_; }
    int labels() const { return Q_; }
    Mode mode() const { return mode_; }
    int label_bits() const { return label_bits_; }
    int feature_bits() const { return n_ * K_; }
    int total_bits() const { return mode_ == Mode::free ? feature_bits() + n_ * label_bits_ : feature_bits(); }

    /// Number of valid basis states (D).
    std::uint64_t dimension() const { return dimension_; }
    /// Number of label configurations (1 in clamped mode, Q^n in free mode).
    std::uint64_t label_configurations() const { return dimension_ >> feature_bits(); }

    int slot(int k, int i) const { return i * K_ + k; }
    std::uint64_t feature_mask() const { return (std::uint64_t{1} << feature_bits()) - 1; }
    int feature_bit(std::uint64_t index, int k, int i) const { return static_cast<int>((index >> slot(k, i)) & 1U); }
    int label_of(std::uint64_t index, int i) const;
    bool is_valid(std::uint64_t index) const;

    /// Basis index from per-position labels (ignored in clamped mode) and feature bits.
    std::uint64_t compose(std::span<const int> labels, std::uint64_t feature_bits) const;

    /// Ordinal t in [0, D) to basis index; increasing in t.
    std::uint64_t basis_index(std::uint64_t ordinal) const;

    /// Visits every valid basis index in increasing order.
    template <class Visit>
    void for_each_basis(Visit &&visit) const {
        for (std::uint64_t t = 0; t < dimension_; ++t) {
            visit(basis_index(t));
        }
    }

    bool same_shape(const RegisterLayout &other) const {
        return n_ == other.n_ && K_ == other.K_ && Q_ == other.Q_ && mode_ == other.mode_;
    }
    friend bool operator==(const RegisterLayout &, const RegisterLayout &) = default;

   private:
    int n_;
    int K_;
    int Q_;
    Mode mode_;
    int label_bits_;
    std::uint64_t dimension_;
};

}  // namespace qcrf::model
