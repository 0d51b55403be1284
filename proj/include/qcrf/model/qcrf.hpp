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

// Operator-level form of the model: P(y|x) = Tr(Lxy e^H0) / Tr(Lx e^Hn), with
// H0 on the feature qubits, Hn = I_Q^n (x) H0 and the two diagonal projectors.
// Everything here is exact (no sampling) and serves as ground truth for the
// simulator.

#include <span>
#include <vector>

#include "qcrf/crf/types.hpp"
#include "qcrf/model/diagonal.hpp"
#include "qcrf/model/layout.hpp"
#include "qcrf/model/projector.hpp"

namespace qcrf::model {

/// Operators for one labeled sequence at fixed weights.
struct QcrfInstance {
    crf::FeatureTable table;
    std::vector<int> labels;
    std::vector<double> w;
    RegisterLayout clamped;
    RegisterLayout free;
    DiagonalOperator h0;
    DiagonalOperator hn;
    Projector lambda_xy;
    Projector lambda_x;

    DiagonalOperator dh0(int k) const { return build_dh(clamped, k); }
    DiagonalOperator dhn(int k) const { return build_dh(free, k); }
};

QcrfInstance make_instance(const crf::FeatureTable &table, std::span<const int> labels, std::span<const double> w);

/// log sum_{b in supp P} e^{H(b)}, max-shifted.
double log_trace_lambda_exp(const Projector &P, const DiagonalOperator &H);

/// Tr(P e^H).
double trace_lambda_exp(const Projector &P, const DiagonalOperator &H);

/// Tr(P e^H F) for a diagonal factor F, e.g. F = dH/dw_k gives Tr(P d(e^H)/dw_k).
double trace_lambda_exp(const Projector &P, const DiagonalOperator &H, const DiagonalOperator &factor);

/// Tr(Lxy(y) e^H0) / Tr(Lx e^Hn).
double quantum_probability(const QcrfInstance &inst, std::span<const int> y);

/// Tr(P d(e^H)/dw_k) / Tr(P e^H) for the clamped (Lxy, H0) pair.
double clamped_average(const QcrfInstance &inst, int k);
/// Same for the free (Lx, Hn) pair.
double free_average(const QcrfInstance &inst, int k);

/// dL/dw_k = -sum_records p [clamped_average - free_average].
std::vector<double> quantum_gradient_exact(const crf::Dataset &ds, std::span<const double> w);

}  // namespace qcrf::model
