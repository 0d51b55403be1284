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

#include <cmath>
#include <vector>

#include "qcrf/crf/crf.hpp"
#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"

namespace qcrf::crf {

GibbsEstimate gradient_gibbs_estimate(const Dataset &ds, std::span<const double> w, const GibbsOptions &opts) {
    if (opts.sweeps < 1) {
        throw DomainError("gibbs sampling needs at least one sweep");
    }
    const auto K = static_cast<std::size_t>(ds.features());
    GibbsEstimate out{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0)};
    std::vector<double> variance(K, 0.0);

    for (std::size_t r = 0; r < ds.size(); ++r) {
        const auto &rec = ds.records()[r];
        const auto &table = rec.table;
        const int n = table.positions();
        const auto Q = static_cast<std::size_t>(table.labels());
        Rng rng(derive_seed(opts.seed, {r}));

        // Site conditionals depend only on the node scores (no transition features).
        const auto s = node_scores(table, w);
        std::vector<double> cumulative(static_cast<std::size_t>(n) * Q);
        for (int i = 0; i < n; ++i) {
            const std::size_t base = static_cast<std::size_t>(i) * Q;
            double hi = s[base];
            for (std::size_t j = 1; j < Q; ++j) {
                hi = std::max(hi, s[base + j]);
            }
            double acc = 0.0;
            for (std::size_t j = 0; j < Q; ++j) {
                acc += std::exp(s[base + j] - hi);
                cumulative[base + j] = acc;
            }
            for (std::size_t j = 0; j < Q; ++j) {
                cumulative[base + j] /= acc;
            }
        }

        std::vector<int> y(static_cast<std::size_t>(n), 0);
        std::vector<double> mean(K, 0.0);
        std::vector<double> m2(K, 0.0);
        std::vector<double> counts(K);
        const std::uint64_t total = opts.burn_in + opts.sweeps;
        for (std::uint64_t sweep = 0; sweep < total; ++sweep) {
            for (int i = 0; i < n; ++i) {
                const std::size_t base = static_cast<std::size_t>(i) * Q;
                const double u = rng.uniform();
                std::size_t j = 0;
                while (j + 1 < Q && u >= cumulative[base + j]) {
                    ++j;
                }
                y[static_cast<std::size_t>(i)] = static_cast<int>(j);
            }
            if (sweep < opts.burn_in) {
                continue;
            }
            std::fill(counts.begin(), counts.end(), 0.0);
            for (int i = 0; i < n; ++i) {
                const auto signs = table.node(i, y[static_cast<std::size_t>(i)]);
                for (std::size_t k = 0; k < K; ++k) {
                    counts[k] += signs[k];
                }
            }
            const double t = static_cast<double>(sweep - opts.burn_in + 1);
            for (std::size_t k = 0; k < K; ++k) {
                const double delta = counts[k] - mean[k];
                mean[k] += delta / t;
                m2[k] += delta * (counts[k] - mean[k]);
            }
        }

        const auto clamped = clamped_feature_counts(table, rec.labels);
        const double sweeps = static_cast<double>(opts.sweeps);
        for (std::size_t k = 0; k < K; ++k) {
            out.gradient[k] -= rec.weight * (clamped[k] - mean[k]);
            const double sample_var = opts.sweeps > 1 ? m2[k] / (sweeps - 1.0) : 0.0;
            variance[k] += rec.weight * rec.weight * sample_var / sweeps;
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        out.standard_error[k] = std::sqrt(variance[k]);
    }
    return out;
}

}  // namespace qcrf::crf
