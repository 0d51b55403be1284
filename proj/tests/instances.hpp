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

// Hand-built instances shared by the unit tests and the acceptance binary.
// Each mirrors the construction in tests/oracle/derive_values.py.

#include <vector>

#include "qcrf/crf/types.hpp"

namespace instances {

inline const std::vector<double> kFullScaleWeights{0.17, 0.35, 0.41, 0.52, 0.37};

/// n=2, K=5, Q=2: nK = 10 feature qubits, 1024 clamped entries.
inline qcrf::crf::Record full_scale() {
    const int first[5] = {1, 1, -1, 1, -1};   // f_k(x_1, label 0)
    const int second[5] = {1, -1, 1, 1, -1};  // f_k(x_2, label 1)
    auto table = qcrf::crf::FeatureTable::from_function(5, 2, 2, [&](int k, int i, int j) {
        if (i == 0) {
            return j == 0 ? first[k] : -first[k];
        }
        return j == 1 ? second[k] : -second[k];
    });
    return {table, {0, 1}, 1.0};
}

/// n=2, K=2, Q=2 with hit probabilities large enough for the sampling studies.
inline const std::vector<double> kDeskWeights{0.3, -0.2};
inline qcrf::crf::Record desk() {
    const int f[2][2][2] = {{{1, -1}, {1, -1}}, {{-1, 1}, {1, -1}}};  // [k][i][j]
    auto table = qcrf::crf::FeatureTable::from_function(2, 2, 2, [&](int k, int i, int j) { return f[k][i][j]; });
    return {table, {0, 1}, 1.0};
}

/// n=1, K=2, Q=2: the data label scores +1 on every feature, the other -1.
inline qcrf::crf::Record aligned() {
    auto table = qcrf::crf::FeatureTable::from_function(2, 1, 2, [](int, int, int j) { return j == 0 ? 1 : -1; });
    return {table, {0}, 1.0};
}

inline qcrf::crf::Dataset single(qcrf::crf::Record r) { return qcrf::crf::Dataset::uniform({std::move(r)}); }

}  // namespace instances
