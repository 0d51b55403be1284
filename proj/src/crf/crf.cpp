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

#include "qcrf/crf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qcrf/errors.hpp"
#include "qcrf/simd/kernels.hpp"

namespace qcrf::crf {
namespace {

void require_weights(const FeatureTable &table, std::span<const double> w) {
    if (static_cast<int>(w.size()) != table.features()) {
        throw DimensionError("weight vector has length " + std::to_string(w.size()) + ", feature table has K = " +
                             std::to_string(table.features()));
    }
}

void require_labels(const FeatureTable &table, std::span<const int> y) {
    if (static_cast<int>(y.size()) != table.positions()) {
        throw DimensionError("label sequence has length " + std::to_string(y.size()) + ", expected n = " +
                             std::to_string(table.positions()));
    }
    for (int label : y) {
        if (label < 0 || label >= table.labels()) {
            throw DomainError("label index out of range: " + std::to_string(label));
        }
    }
}

double log_sum_exp(std::span<const double> v) {
    const double hi = *std::max_element(v.begin(), v.end());
    double acc = 0.0;
    for (double x : v) {
        acc += std::exp(x - hi);
    }
    return hi + std::log(acc);
}

}  // namespace

double sequence_count(int Q, int n) { return std::pow(static_cast<double>(Q), static_cast<double>(n)); }

void require_enumerable(const FeatureTable &table) {
    const double count = sequence_count(table.labels(), table.positions());
    if (count > kEnumerationCap) {
        throw EnumerationTooLarge(count, kEnumerationCap);
    }
}

double potential(const FeatureTable &table, std::span<const double> w, std::span<const int> y) {
    require_weights(table, w);
    require_labels(table, y);
    double e = 0.0;
    for (int i = 0; i < table.positions(); ++i) {
        e += simd::signed_dot(w, table.node(i, y[static_cast<std::size_t>(i)]));
    }
    return e;
}

std::vector<double> node_scores(const FeatureTable &table, std::span<const double> w) {
    require_weights(table, w);
    const int n = table.positions();
    const int Q = table.labels();
    std::vector<double> s(static_cast<std::size_t>(n) * Q);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < Q; ++j) {
            s[static_cast<std::size_t>(i) * Q + j] = simd::signed_dot(w, table.node(i, j));
        }
    }
    return s;
}

double log_partition(const FeatureTable &table, std::span<const double> w) {
    const auto s = node_scores(table, w);
    const auto Q = static_cast<std::size_t>(table.labels());
    double log_z = 0.0;
    for (int i = 0; i < table.positions(); ++i) {
        log_z += log_sum_exp(std::span<const double>(s).subspan(static_cast<std::size_t>(i) * Q, Q));
    }
    return log_z;
}

double log_partition_naive(const FeatureTable &table, std::span<const double> w) {
    require_weights(table, w);
    require_enumerable(table);
    std::vector<double> energies;
    energies.reserve(static_cast<std::size_t>(sequence_count(table.labels(), table.positions())));
    for_each_labeling(table.positions(), table.labels(),
                      [&](std::span<const int> y) { energies.push_back(potential(table, w, y)); });
    return log_sum_exp(energies);
}

double log_conditional_probability(const FeatureTable &table, std::span<const double> w, std::span<const int> y) {
    return potential(table, w, y) - log_partition(table, w);
}

double conditional_probability(const FeatureTable &table, std::span<const double> w, std::span<const int> y) {
    return std::exp(log_conditional_probability(table, w, y));
}

std::vector<double> clamped_feature_counts(const FeatureTable &table, std::span<const int> y) {
    require_labels(table, y);
    std::vector<double> c(static_cast<std::size_t>(table.features()), 0.0);
    for (int i = 0; i < table.positions(); ++i) {
        const auto signs = table.node(i, y[static_cast<std::size_t>(i)]);
        for (int k = 0; k < table.features(); ++k) {
            c[static_cast<std::size_t>(k)] += signs[static_cast<std::size_t>(k)];
        }
    }
    return c;
}

double nll(const Dataset &ds, std::span<const double> w) {
    if (ds.empty()) {
        throw DimensionError("nll of an empty dataset");
    }
    double loss = 0.0;
    for (const auto &rec : ds.records()) {
        loss -= rec.weight * log_conditional_probability(rec.table, w, rec.labels);
    }
    return loss;
}

std::vector<double> gradient_naive(const Dataset &ds, std::span<const double> w) {
    const auto K = static_cast<std::size_t>(ds.features());
    std::vector<double> grad(K, 0.0);
    for (const auto &rec : ds.records()) {
        require_weights(rec.table, w);
        require_enumerable(rec.table);
        const double log_z = log_partition_naive(rec.table, w);
        std::vector<double> model(K, 0.0);
        for_each_labeling(rec.table.positions(), rec.table.labels(), [&](std::span<const int> y) {
            const double p = std::exp(potential(rec.table, w, y) - log_z);
            const auto counts = clamped_feature_counts(rec.table, y);
            for (std::size_t k = 0; k < K; ++k) {
                model[k] += p * counts[k];
            }
        });
        const auto clamped = clamped_feature_counts(rec.table, rec.labels);
        for (std::size_t k = 0; k < K; ++k) {
            grad[k] -= rec.weight * (clamped[k] - model[k]);
        }
    }
    return grad;
}

std::vector<double> gradient_factorized(const Dataset &ds, std::span<const double> w) {
    const auto K = static_cast<std::size_t>(ds.features());
    std::vector<double> grad(K, 0.0);
    std::vector<double> model(K);
    std::vector<double> marginal;
    for (const auto &rec : ds.records()) {
        const auto &table = rec.table;
        const auto Q = static_cast<std::size_t>(table.labels());
        const auto s = node_scores(table, w);
        std::fill(model.begin(), model.end(), 0.0);
        marginal.resize(Q);
        for (int i = 0; i < table.positions(); ++i) {
            const auto row = std::span<const double>(s).subspan(static_cast<std::size_t>(i) * Q, Q);
            const double lse = log_sum_exp(row);
            for (std::size_t j = 0; j < Q; ++j) {
                marginal[j] = std::exp(row[j] - lse);
            }
            for (std::size_t j = 0; j < Q; ++j) {
                const auto signs = table.node(i, static_cast<int>(j));
                for (std::size_t k = 0; k < K; ++k) {
                    model[k] += marginal[j] * signs[k];
                }
            }
        }
        const auto clamped = clamped_feature_counts(table, rec.labels);
        for (std::size_t k = 0; k < K; ++k) {
            grad[k] -= rec.weight * (clamped[k] - model[k]);
        }
    }
    return grad;
}

std::vector<int> most_probable_labels(const FeatureTable &table, std::span<const double> w) {
    const auto s = node_scores(table, w);
    const auto Q = static_cast<std::size_t>(table.labels());
    std::vector<int> y(static_cast<std::size_t>(table.positions()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < Q; ++j) {
            if (s[i * Q + j] > s[i * Q + best]) {
                best = j;
            }
        }
        y[i] = static_cast<int>(best);
    }
    return y;
}

}  // namespace qcrf::crf
