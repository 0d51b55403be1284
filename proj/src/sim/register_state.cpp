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

#include "qcrf/sim/register_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qcrf::sim {

double RegisterState::norm() const {
    double acc = 0.0;
    for (const auto &b : branches_) {
        acc += std::norm(b.amp);
    }
    return std::sqrt(acc);
}

double RegisterState::ancilla_zero_probability() const {
    double acc = 0.0;
    for (const auto &b : branches_) {
        if (b.ancilla == 0) {
            acc += std::norm(b.amp);
        }
    }
    return acc;
}

double max_amplitude_difference(const RegisterState &a, const RegisterState &b) {
    if (a.size() != b.size()) {
        return std::numeric_limits<double>::infinity();
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const auto &x = a.branches()[t];
        const auto &y = b.branches()[t];
        if (x.main != y.main || x.reg2 != y.reg2 || x.reg3 != y.reg3 || x.exp_reg != y.exp_reg ||
            x.lambda_reg != y.lambda_reg || x.ancilla != y.ancilla) {
            return std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, std::abs(x.amp - y.amp));
    }
    return worst;
}

}  // namespace qcrf::sim
