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

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcrf/crf/crf.hpp"
#include "qcrf/crf/types.hpp"

namespace qcrf::crf {

enum class Backend { naive, factorized, gibbs, quantum };

std::string_view backend_name(Backend backend);
/// Accepts "exact" as an alias for factorized. Throws ConfigError otherwise.
Backend parse_backend(std::string_view name);

/// Gradient of the dataset loss at w; `iteration` lets stochastic back-ends
/// derive a fresh seed per step.
using GradientFn = std::function<std::vector<double>(const Dataset &, std::span<const double> w, std::size_t iteration)>;

/// Gradient function for the classical back-ends (naive, factorized, gibbs).
/// The quantum back-end lives in the simulator; asking for it here throws.
GradientFn classical_gradient(Backend backend, const GibbsOptions &gibbs = {});

struct TrainStep {
    std::size_t iteration = 0;
    std::vector<double> w;  ///< weights at which nll and gradient were evaluated
    double nll = 0.0;
    double grad_norm = 0.0;
};

struct TrainOptions {
    std::size_t iters = 1;
    /// Abort after this many consecutive nll increases; 0 disables the check.
    std::size_t divergence_window = 10;
    /// Called after each step, including the one that trips the divergence check.
    std::function<void(const TrainStep &, std::span<const double> gradient)> on_step;
};

/// Gradient descent w <- w - eta * dL/dw. Returns one entry per iteration.
std::vector<TrainStep> train(const Dataset &ds, const Weights &w0, const GradientFn &gradient,
                             const TrainOptions &opts);

}  // namespace qcrf::crf
