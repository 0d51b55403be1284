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

#include "qcrf/crf/train.hpp"

#include <cmath>
#include <sstream>

#include "qcrf/errors.hpp"
#include "qcrf/random.hpp"

namespace qcrf::crf {

std::string_view backend_name(Backend backend) {
    switch (backend) {
        case Backend::naive:
            return "naive";
        case Backend::factorized:
            return "factorized";
        case Backend::gibbs:
            return "gibbs";
        case Backend::quantum:
            return "quantum";
    }
    return "unknown";
}

Backend parse_backend(std::string_view name) {
    if (name == "naive") return Backend::naive;
    if (name == "factorized" || name == "exact") return Backend::factorized;
    if (name == "gibbs") return Backend::gibbs;
    if (name == "quantum") return Backend::quantum;
    throw ConfigError("unknown gradient back-end: " + std::string(name));
}

GradientFn classical_gradient(Backend backend, const GibbsOptions &gibbs) {
    switch (backend) {
        case Backend::naive:
            return [](const Dataset &ds, std::span<const double> w, std::size_t) { return gradient_naive(ds, w); };
        case Backend::factorized:
            return [](const Dataset &ds, std::span<const double> w, std::size_t) { return gradient_factorized(ds, w); };
        case Backend::gibbs:
            return [gibbs](const Dataset &ds, std::span<const double> w, std::size_t iteration) {
                GibbsOptions step = gibbs;
                step.seed = derive_seed(gibbs.seed, {iteration});
                return gradient_gibbs(ds, w, step);
            };
        case Backend::quantum:
            break;
    }
    throw ConfigError("the quantum back-end is provided by the simulator (sim::quantum_gradient)");
}

std::vector<TrainStep> train(const Dataset &ds, const Weights &w0, const GradientFn &gradient,
                             const TrainOptions &opts) {
    if (opts.iters < 1) {
        throw DomainError("training needs at least one iteration");
    }
    w0.validate();
    if (static_cast<int>(w0.size()) != ds.features()) {
        throw DimensionError("initial weights do not match the dataset's feature count");
    }

    std::vector<TrainStep> trajectory;
    trajectory.reserve(opts.iters);
    std::vector<double> w = w0.w;
    std::size_t rising = 0;
    for (std::size_t it = 0; it < opts.iters; ++it) {
        TrainStep step;
        step.iteration = it;
        step.w = w;
        step.nll = nll(ds, w);
        const auto grad = gradient(ds, w, it);
        double sq = 0.0;
        for (double g : grad) {
            sq += g * g;
        }
        step.grad_norm = std::sqrt(sq);

        if (!trajectory.empty() && step.nll > trajectory.back().nll) {
            ++rising;
        } else {
            rising = 0;
        }
        if (opts.on_step) {
            opts.on_step(step, grad);
        }
        if (opts.divergence_window > 0 && rising >= opts.divergence_window) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "training diverged: nll increased for " << rising << " consecutive iterations (iteration " << it
                << ", nll " << step.nll << ", |grad| " << step.grad_norm << ", eta " << w0.eta << ")";
            throw DivergenceError(msg.str());
        }

        for (std::size_t k = 0; k < w.size(); ++k) {
            w[k] -= w0.eta * grad[k];
        }
        trajectory.push_back(std::move(step));
    }
    return trajectory;
}

}  // namespace qcrf::crf
