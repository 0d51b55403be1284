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
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qcrf/model/layout.hpp"

namespace qcrf::model {

/// Real diagonal operator over a register layout, evaluated lazily.
///
/// Operators built from Pauli-Z sums keep their coefficients (`ZForm`) so
/// contiguous blocks of entries go through the vectorized zsum kernel; every
/// other composition falls back to a per-index function.
class DiagonalOperator {
   public:
    /// entry(b) = offset + sum_slot coeff[slot] * (-1)^bit_slot(b)
    struct ZForm {
        std::vector<double> coeff;  ///< one per feature qubit
        double offset = 0.0;
    };

    static DiagonalOperator from_function(RegisterLayout layout, std::function<double(std::uint64_t)> fn);
    static DiagonalOperator from_zform(RegisterLayout layout, ZForm form);
    static DiagonalOperator constant(RegisterLayout layout, double value);

    const RegisterLayout &layout() const { return layout_; }
    const std::optional<ZForm> &zform() const { return zform_; }

    double operator()(std::uint64_t index) const;

    /// Entries for indices first, first+1, ..., first+out.size()-1.
    void eval_range(std::uint64_t first, std::span<double> out) const;

    /// Entries at the valid basis states, in increasing index order.
    std::vector<double> entries() const;

    /// [lo, hi] containing every entry (exact for a ZForm; scanned otherwise).
    std::pair<double, double> spectrum_bounds() const;

    DiagonalOperator operator+(const DiagonalOperator &other) const;
    DiagonalOperator operator*(const DiagonalOperator &other) const;
    DiagonalOperator scaled(double factor) const;
    DiagonalOperator exp() const;
    DiagonalOperator map(std::function<double(double)> fn) const;

    /// Pointwise max(entry, 0) and max(-entry, 0).
    DiagonalOperator positive_part() const;
    DiagonalOperator negative_part() const;

    /// "index<TAB>value" per valid basis state; refuses D > 2^12.
    void dump(std::ostream &out) const;

   private:
    DiagonalOperator(RegisterLayout layout, std::shared_ptr<const std::function<double(std::uint64_t)>> fn,
                     std::optional<ZForm> zform);
    void require_same_layout(const DiagonalOperator &other) const;

    RegisterLayout layout_;
    std::shared_ptr<const std::function<double(std::uint64_t)>> fn_;
    std::optional<ZForm> zform_;
};

/// Pauli-Z on feature qubit (k, i), identity elsewhere (0-based k, i).
DiagonalOperator sigma_z(const RegisterLayout &layout, int k, int i);

/// Hamiltonian sum_i sum_k w_k sigma_z(k, i).
DiagonalOperator build_h(const RegisterLayout &layout, std::span<const double> w);

/// dH/dw_k = sum_i sigma_z(k, i).
DiagonalOperator build_dh(const RegisterLayout &layout, int k);

}  // namespace qcrf::model
