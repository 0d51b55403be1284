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

#include <complex>
#include <cstdint>
#include <vector>

#include "qcrf/model/layout.hpp"

namespace qcrf::sim {

/// Largest number of main-register branches we simulate.
inline constexpr std::uint64_t kSimulationCap = std::uint64_t{1} << 16;

enum class RegisterId {
    reg2,  ///< phase register for the Hamiltonian
    reg3,  ///< phase register for the diagonal factor
};

/// One computational-basis branch of the composite register.
///
/// Besides the two r-bit phase registers, arithmetic writes into two
/// fixed-point work registers (`exp_reg`, `lambda_reg`) so every gate is a
/// bijection on register values.
struct Branch {
    std::uint64_t main = 0;
    std::uint64_t reg2 = 0;
    std::uint64_t reg3 = 0;
    std::uint64_t exp_reg = 0;
    std::uint64_t lambda_reg = 0;
    std::uint8_t ancilla = 0;
    std::complex<double> amp;

    bool registers_clear() const { return reg2 == 0 && reg3 == 0 && exp_reg == 0 && lambda_reg == 0 && ancilla == 0; }
    friend bool operator==(const Branch &, const Branch &) = default;
};

/// Sparse amplitude map: only reachable branches are stored, ordered by
/// (main, ancilla). Every other register is a function of those two keys.
class RegisterState {
   public:
    explicit RegisterState(model::RegisterLayout layout) : layout_(layout) {}

    const model::RegisterLayout &layout() const { return layout_; }
    std::vector<Branch> &branches() { return branches_; }
    const std::vector<Branch> &branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }

    double norm() const;
    /// Total probability of branches with the ancilla in |0>.
    double ancilla_zero_probability() const;

    friend bool operator==(const RegisterState &, const RegisterState &) = default;

   private:
    model::RegisterLayout layout_;
    std::vector<Branch> branches_;
};

/// Max |a_i - b_i| over matching branches; infinity if the keys differ.
double max_amplitude_difference(const RegisterState &a, const RegisterState &b);

}  // namespace qcrf::sim
