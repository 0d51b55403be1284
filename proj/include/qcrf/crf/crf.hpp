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

// Linear-chain CRF with node features only: P(y|x) = exp(E(x,y)) / Z(x) with
// E(x,y) = sum_i sum_k w_k f_k(x_i, y_i). Because there are no transition
// features the partition sum factorizes over positions.

#include <cstdint>
#include <span>
#include <vector>

#include "qcrf/crf/types.hpp"

namespace qcrf::crf {

/// Naive routines refuse to enumerate more label sequences than this.
inline constexpr double kEnumerationCap = 1048576.0;  // 2^20

/// Q^n as a double (never overflows for the sizes we accept).
double sequence_count(int Q, int n);

/// Throws EnumerationTooLarge when Q^n exceeds kEnumerationCap.
void require_enumerable(const FeatureTable &table);

/// Calls `visit(y)` for every label sequence in lexicographic order
/// (position 0 varies fastest).
template <class Visit>
void for_each_labeling(int n, int Q, Visit &&visit) {
    std::vector<int> y(static_cast<std::size_t>(n), 0);
    while (true) {
        visit(std::span<const int>(y));
        int i = 0;
        while (i < n && ++y[static_cast<std::size_t>(i)] == Q) {
            y[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == n) {
            return;
        }
    }
}

double potential(const FeatureTable &table, std::span<const double> w, std::span<const int> y);

/// s[i * Q + j] = sum_k w_k f_k(x_i, j).
std::vector<double> node_scores(const FeatureTable &table, std::span<const double> w);

/// log Z via the per-position factorization.
double log_partition(const FeatureTable &table, std::span<const double> w);

/// log Z by enumerating all Q^n label sequences.
double log_partition_naive(const FeatureTable &table, std::span<const double> w);

double log_conditional_probability(const FeatureTable &table, std::span<const double> w,
                                   std::span<const int> y);
double conditional_probability(const FeatureTable &table, std::span<const double> w,
                               std::span<const int> y);

/// c_k = sum_i f_k(x_i, y_i).
std::vector<double> clamped_feature_counts(const FeatureTable &table, std::span<const int> y);

/// Average negative log-likelihood over the dataset.
double nll(const Dataset &ds, std::span<const double> w);

/// dL/dw by full enumeration over label sequences (cap enforced per record).
std::vector<double> gradient_naive(const Dataset &ds, std::span<const double> w);

/// dL/dw from per-position marginals; O(N n Q K).
std::vector<double> gradient_factorized(const Dataset &ds, std::span<const double> w);

struct GibbsOptions {
    std::uint64_t sweeps = 1000;
    std::uint64_t burn_in = 100;
    std::uint64_t seed = 0;
};

struct GibbsEstimate {
    std::vector<double> gradient;
    /// Per-component standard error of the Monte-Carlo model term.
    std::vector<double> standard_error;
};

/// Single-site Gibbs chain over label sequences for the model expectation,
/// combined with the exact clamped term. Deterministic under a fixed seed.
GibbsEstimate gradient_gibbs_estimate(const Dataset &ds, std::span<const double> w, const GibbsOptions &opts);

inline std::vector<double> gradient_gibbs(const Dataset &ds, std::span<const double> w, const GibbsOptions &opts) {
    return gradient_gibbs_estimate(ds, w, opts).gradient;
}

/// Lowest-index argmax of P(y|x); diagnostics only.
std::vector<int> most_probable_labels(const FeatureTable &table, std::span<const double> w);

}  // namespace qcrf::crf
