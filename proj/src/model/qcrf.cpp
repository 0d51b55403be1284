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

#include "qcrf/model/qcrf.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "qcrf/errors.hpp"

namespace qcrf::model {

namespace {

void require_shared_layout(const Projector &P, const DiagonalOperator &H) {
    if (!(P.layout() == H.layout())) {
        throw DimensionError("projector and operator live on different layouts");
    }
}

std::vector<double> support_entries(const std::vector<std::uint64_t> &support, const DiagonalOperator &H) {
    std::vector<double> e(support.size());
    for (std::size_t t = 0; t < support.size(); ++t) {
        e[t] = H(support[t]);
    }
    return e;
}

}  // namespace

QcrfInstance make_instance(const crf::FeatureTable &table, std::span<const int> labels, std::span<const double> w) {
    const RegisterLayout clamped(table.positions(), table.features(), table.labels(), Mode::clamped);
    const RegisterLayout free(table.positions(), table.features(), table.labels(), Mode::free);
    return QcrfInstance{table,
                        std::vector<int>(labels.begin(), labels.end()),
                        std::vector<double>(w.begin(), w.end()),
                        clamped,
                        free,
                        build_h(clamped, w),
                        build_h(free, w),
                        build_lambda_xy(table, labels),
                        build_lambda_x(table)};
}

double log_trace_lambda_exp(const Projector &P, const DiagonalOperator &H) {
    require_shared_layout(P, H);
    const auto e = support_entries(P.support(), H);
    if (e.empty()) {
        return -std::numeric_limits<double>::infinity();
    }
    const double hi = *std::max_element(e.begin(), e.end());
    double acc = 0.0;
    for (double v : e) {
        acc += std::exp(v - hi);
    }
    return hi + std::log(acc);
}

double trace_lambda_exp(const Projector &P, const DiagonalOperator &H) { return std::exp(log_trace_lambda_exp(P, H)); }

double trace_lambda_exp(const Projector &P, const DiagonalOperator &H, const DiagonalOperator &factor) {
    require_shared_layout(P, H);
    require_shared_layout(P, factor);
    const auto support = P.support();
    const auto e = support_entries(support, H);
    if (e.empty()) {
        return 0.0;
    }
    const double hi = *std::max_element(e.begin(), e.end());
    double acc = 0.0;
    for (std::size_t t = 0; t < support.size(); ++t) {
        acc += std::exp(e[t] - hi) * factor(support[t]);
    }
    return std::exp(hi) * acc;
}

double quantum_probability(const QcrfInstance &inst, std::span<const int> y) {
    const Projector lxy = build_lambda_xy(inst.table, y);
    const double log_num = log_trace_lambda_exp(lxy, inst.h0);
    const double log_den = log_trace_lambda_exp(inst.lambda_x, inst.hn);
    // Both traces are sums of exponentials over non-empty supports.
    assert(std::isfinite(log_den));
    return std::exp(log_num - log_den);
}

namespace {

/// Tr(P e^H F) / Tr(P e^H) with a common max shift.
double weighted_average(const Projector &P, const DiagonalOperator &H, const DiagonalOperator &F) {
    const auto support = P.support();
    const auto e = support_entries(support, H);
    const double hi = *std::max_element(e.begin(), e.end());
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < support.size(); ++t) {
        const double weight = std::exp(e[t] - hi);
        num += weight * F(support[t]);
        den += weight;
    }
    return num / den;
}

}  // namespace

double clamped_average(const QcrfInstance &inst, int k) { return weighted_average(inst.lambda_xy, inst.h0, inst.dh0(k)); }

double free_average(const QcrfInstance &inst, int k) { return weighted_average(inst.lambda_x, inst.hn, inst.dhn(k)); }

std::vector<double> quantum_gradient_exact(const crf::Dataset &ds, std::span<const double> w) {
    const auto K = static_cast<std::size_t>(ds.features());
    if (w.size() != K) {
        throw DimensionError("weight vector length does not match K");
    }
    std::vector<double> grad(K, 0.0);
    for (const auto &rec : ds.records()) {
        const auto inst = make_instance(rec.table, rec.labels, w);
        for (std::size_t k = 0; k < K; ++k) {
            grad[k] -= rec.weight * (clamped_average(inst, static_cast<int>(k)) - free_average(inst, static_cast<int>(k)));
        }
    }
    return grad;
}

}  // namespace qcrf::model
